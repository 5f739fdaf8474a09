from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamfactor.bruteforce import chi_square_uniformity
from hamfactor.exposure import (
    BudgetExceeded,
    ExposureOracle,
    ExposureRecord,
    default_budget,
)

from helpers import cycle_graph


def rng(seed=0):
    return np.random.default_rng(seed)


def test_default_budget_formula():
    n = 2000
    assert default_budget(n) == math.ceil(20.0 * n ** 0.75 * math.log(n))
    assert default_budget(1) == 1


def test_scripted_oracle_answers_from_permutation():
    perm = [2, 0, 3, 1]
    o = ExposureOracle.from_permutation(perm)
    assert o.expose_image(0) == 2
    assert o.expose_preimage(1) == 3
    assert o.exposures == 2
    assert o.log == [ExposureRecord("img", 0, 2), ExposureRecord("pre", 1, 3)]
    assert o.exposed_pairs() == [(0, 2), (3, 1)]


def test_requery_is_free():
    o = ExposureOracle.from_permutation([1, 2, 0])
    o.expose_image(0)
    assert o.expose_image(0) == 1
    assert o.expose_preimage(1) == 0  # same pair from the other side
    assert o.exposures == 1
    assert o.image_if_exposed(0) == 1
    assert o.image_if_exposed(2) is None
    assert o.preimage_if_exposed(1) == 0
    assert o.preimage_if_exposed(0) is None


def test_budget_enforced():
    o = ExposureOracle.uniform(10, rng(1), budget=3)
    for u in range(3):
        o.expose_image(u)
    o.expose_image(2)  # cached, free
    with pytest.raises(BudgetExceeded):
        o.expose_image(5)
    assert o.exposures == 3


def test_oracle_is_consistent_bijection():
    o = ExposureOracle.uniform(30, rng(2))
    for u in range(0, 30, 2):
        o.expose_image(u)
    for v in range(30):
        o.expose_preimage(v)
    full = o.full_map()
    assert sorted(full.tolist()) == list(range(30))
    for u in range(0, 30, 2):
        assert o.expose_preimage(o.expose_image(u)) == u


def test_is_exposed_tracks_both_sides():
    o = ExposureOracle.from_permutation([2, 0, 3, 1])
    assert not o.is_exposed(0, "G") and not o.is_exposed(2, "F")
    v = o.expose_image(0)
    assert v == 2
    assert o.is_exposed(0, "G")
    assert o.is_exposed(2, "F")
    assert not o.is_exposed(1, "G")
    assert not o.is_exposed(0, "F")
    assert o.exposed_count() == 1
    o.expose_preimage(1)
    assert o.is_exposed(1, "F") and o.is_exposed(3, "G")
    assert o.exposed_count() == 2
    with pytest.raises(ValueError):
        o.is_exposed(0, "H")


def test_full_map_completes_without_charging():
    o = ExposureOracle.uniform(12, rng(3), budget=4)
    for u in range(4):
        o.expose_image(u)
    full = o.full_map()
    assert sorted(full.tolist()) == list(range(12))
    assert all(full[u] == o.image_if_exposed(u) for u in range(4))
    assert o.exposures == 4


def test_deterministic_under_seed():
    a = ExposureOracle.uniform(50, rng(7))
    b = ExposureOracle.uniform(50, rng(7))
    for u in (3, 1, 4, 1, 5, 9):
        a.expose_image(u)
        b.expose_image(u)
    a.expose_preimage(0)
    b.expose_preimage(0)
    assert a.log == b.log


def test_overall_law_is_uniform_permutation():
    # expose everything on many fresh oracles; all 24 permutations of [4]
    # should appear equally often
    import itertools

    perms = {p: i for i, p in enumerate(itertools.permutations(range(4)))}
    counts = [0] * 24
    r = rng(11)
    for _ in range(6000):
        o = ExposureOracle.uniform(4, r)
        got = tuple(o.expose_image(u) for u in range(4))
        counts[perms[got]] += 1
    stat, p = chi_square_uniformity(counts)
    assert p > 1e-3, (stat, counts)


def test_conditional_law_is_uniform_on_complement():
    # after pinning three images, the next image is uniform over the other 17
    r = rng(13)
    counts = {v: 0 for v in range(20)}
    for _ in range(20000):
        o = ExposureOracle.uniform(20, r)
        seen = {o.expose_image(u) for u in (0, 1, 2)}
        v = o.expose_image(3)
        assert v not in seen
        counts[v] += 1
    # drop the three pinned targets per draw by renormalizing: every target
    # still gets hit, just less often; crude check plus chi-square on the
    # unconditional marginal, which is uniform over all 20 by symmetry
    stat, p = chi_square_uniformity(list(counts.values()))
    assert p > 1e-3, (stat, counts)


def test_mixed_direction_queries_cannot_collide():
    r = rng(17)
    for trial in range(200):
        o = ExposureOracle.uniform(8, r)
        o.expose_image(0)
        o.expose_preimage(5)
        o.expose_image(3)
        o.expose_preimage(1)
        full = o.full_map()
        assert sorted(full.tolist()) == list(range(8))


def test_image_edges_certification():
    g = cycle_graph(5)
    o = ExposureOracle.from_permutation([4, 3, 2, 1, 0])
    assert o.image_edges(g) == set()
    o.expose_image(0)
    o.expose_image(1)
    # only edge (0,1) has both endpoints exposed; its image is (3,4)
    assert o.image_edges(g) == {(3, 4)}
    o.expose_image(4)
    assert o.image_edges(g) == {(3, 4), (0, 4)}


def test_rejects_bad_hidden():
    with pytest.raises(ValueError):
        ExposureOracle.from_permutation([0, 0, 1])
    with pytest.raises(ValueError):
        ExposureOracle(5)
