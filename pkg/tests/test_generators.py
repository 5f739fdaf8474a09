from __future__ import annotations

import numpy as np
import pytest

from hamfactor.bruteforce import chi_square_uniformity, enumerate_two_factors, held_karp
from hamfactor.generators import deterministic_family, sample_regular, sample_two_factor


def rng(seed=0):
    return np.random.default_rng(seed)


def test_sample_regular_basics():
    g = sample_regular(50, 3, rng(1))
    assert g.n == 50 and g.is_regular(3)
    g2 = sample_regular(51, 2, rng(2))
    assert g2.is_regular(2)


def test_sample_regular_parameter_errors():
    with pytest.raises(ValueError):
        sample_regular(5, 3, rng())  # odd stub count
    with pytest.raises(ValueError):
        sample_regular(4, 4, rng())
    with pytest.raises(ValueError):
        sample_regular(4, 0, rng())


def test_sample_regular_deterministic_under_seed():
    a = sample_regular(30, 3, rng(7))
    b = sample_regular(30, 3, rng(7))
    assert a == b
    c = sample_regular(30, 3, rng(8))
    assert a != c  # one collision in 2^... would be astonishing


def test_two_factor_pairing_valid():
    cover = sample_two_factor(40, rng(3))
    cover.validate()
    assert min(cover.cycle_lengths()) >= 3
    assert sum(cover.cycle_lengths()) == 40


def test_two_factor_pairing_uniform_small():
    # all 12 covers of 5 points should come up about equally often
    factors = enumerate_two_factors(5)
    index = {frozenset(f.edge_set()): i for i, f in enumerate(factors)}
    counts = [0] * len(factors)
    r = rng(11)
    for _ in range(3000):
        cover = sample_two_factor(5, r)
        counts[index[frozenset(cover.edge_set())]] += 1
    stat, p = chi_square_uniformity(counts)
    assert p > 1e-3, (stat, counts)


def test_two_factor_mode_distributions_differ():
    # at n=6 the two-triangle type has mass 10/70 under uniform but 1/4
    # under the projected-permutation law
    r = rng(5)
    n_draws = 1500

    def frac_two_triangles(mode):
        hits = 0
        for _ in range(n_draws):
            cover = sample_two_factor(6, r, mode=mode)
            hits += cover.k == 2
        return hits / n_draws

    assert frac_two_triangles("pairing") < 0.2
    assert frac_two_triangles("permutation") > 0.2


def test_two_factor_permutation_cycle_count():
    # conditioned permutation keeps roughly log(n) + gamma - 3/2 cycles
    r = rng(9)
    ks = [sample_two_factor(1000, r, mode="permutation").k for _ in range(50)]
    assert 4.5 < np.mean(ks) < 7.5


def test_two_factor_bad_mode():
    with pytest.raises(ValueError):
        sample_two_factor(10, rng(), mode="bogus")
    with pytest.raises(ValueError):
        sample_two_factor(2, rng())


# ---- deterministic families ----


def test_cliques_family():
    g = deterministic_family("cliques", 12, 3)
    assert g.is_regular(3) and g.m == 12 // 4 * 6
    assert held_karp(g) is None  # disconnected
    t = deterministic_family("cliques", 9, 2)
    assert t.is_regular(2)
    with pytest.raises(ValueError):
        deterministic_family("cliques", 10, 3)


def test_circulant_family():
    g4 = deterministic_family("circulant", 11, 4)
    assert g4.is_regular(4)
    g3 = deterministic_family("circulant", 8, 3)
    assert g3.is_regular(3)
    assert deterministic_family("circulant", 9, 2).is_regular(2)
    with pytest.raises(ValueError):
        deterministic_family("circulant", 9, 3)  # odd degree, odd n
    with pytest.raises(ValueError):
        deterministic_family("circulant", 4, 4)


def test_prism_family():
    g = deterministic_family("prism", 10)
    assert g.is_regular(3)
    assert held_karp(g) is not None
    with pytest.raises(ValueError):
        deterministic_family("prism", 9)


def test_unknown_family():
    with pytest.raises(ValueError):
        deterministic_family("moebius", 10)
