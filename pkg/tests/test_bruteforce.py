from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamfactor.bruteforce import (
    backtracking_hamilton,
    chi_square_uniformity,
    chisq_survival,
    count_two_factors,
    enumerate_two_factors,
    held_karp,
)
from hamfactor.graphs import Graph, cycle_decomposition, verify_cycle_in_graph

from helpers import complete_graph, cycle_graph, path_graph, petersen


def test_held_karp_simple_cases():
    assert held_karp(cycle_graph(5)) is not None
    assert held_karp(complete_graph(4)) is not None
    assert held_karp(path_graph(5)) is None
    assert held_karp(Graph(2, [(0, 1)])) is None


def test_held_karp_result_is_valid():
    h = held_karp(complete_graph(6))
    assert h is not None and verify_cycle_in_graph(h, complete_graph(6))


def test_petersen_has_no_hamilton_cycle():
    g = petersen()
    assert held_karp(g) is None
    assert backtracking_hamilton(g) is None


def test_held_karp_refuses_large_inputs():
    with pytest.raises(ValueError):
        held_karp(Graph(23, [(i, (i + 1) % 23) for i in range(23)]))


@settings(max_examples=120, deadline=None)
@given(st.integers(min_value=3, max_value=7), st.data())
def test_two_solvers_agree(n, data):
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    mask = data.draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    g = Graph(n, [e for e, keep in zip(pairs, mask) if keep])
    a = held_karp(g)
    b = backtracking_hamilton(g)
    assert (a is None) == (b is None)
    if a is not None:
        assert verify_cycle_in_graph(a, g)
        assert verify_cycle_in_graph(b, g)


# ---- 2-factor counting and enumeration ----


def test_two_factor_counts_known_values():
    # cycle-type sum, spot-checked by the explicit enumeration below
    assert [count_two_factors(n) for n in range(0, 10)] == [
        0, 0, 0, 1, 3, 12, 70, 465, 3507, 30016,
    ]


@pytest.mark.parametrize("n", range(3, 9))
def test_enumeration_matches_count(n):
    factors = enumerate_two_factors(n)
    assert len(factors) == count_two_factors(n)
    as_sets = {frozenset(c.edge_set()) for c in factors}
    assert len(as_sets) == len(factors)


def test_enumerated_factors_are_valid_covers():
    for cover in enumerate_two_factors(6):
        cover.validate()
        assert min(cover.cycle_lengths()) >= 3


def test_enumeration_refuses_large_inputs():
    with pytest.raises(ValueError):
        enumerate_two_factors(10)


# ---- chi-square ----


def test_chisq_survival_endpoints():
    assert chisq_survival(0.0, 5) == 1.0
    assert chisq_survival(1e9, 5) < 1e-12
    with pytest.raises(ValueError):
        chisq_survival(1.0, 0)


def test_chisq_survival_monotone():
    vals = [chisq_survival(x, 8) for x in (1.0, 4.0, 8.0, 16.0, 32.0)]
    assert vals == sorted(vals, reverse=True)


@pytest.mark.parametrize(
    "x,df,p",
    [
        (18.307, 10, 0.05),
        (9.488, 4, 0.05),
        (29.588, 20, 0.077),  # df-sized statistic lands mid-tail
    ],
)
def test_chisq_survival_reference_quantiles(x, df, p):
    assert chisq_survival(x, df) == pytest.approx(p, abs=6e-3)


def test_uniformity_statistic():
    stat, p = chi_square_uniformity([25, 25, 25, 25])
    assert stat == 0.0 and p == 1.0
    stat, p = chi_square_uniformity([30, 20, 30, 20])
    assert stat == pytest.approx(4.0)
    assert 0.2 < p < 0.3  # chi2(3) upper tail at 4.0 is about 0.26
    with pytest.raises(ValueError):
        chi_square_uniformity([5])
    with pytest.raises(ValueError):
        chi_square_uniformity([0, 0])


def test_uniformity_accepts_raw_samples():
    draws = [0, 1, 2, 3] * 25
    stat, p = chi_square_uniformity(draws, universe=4)
    assert stat == 0.0 and p == 1.0
    # same data as counts and as samples must agree
    assert chi_square_uniformity(draws, 4) == chi_square_uniformity([25] * 4)
    with pytest.raises(ValueError, match="undersampled"):
        chi_square_uniformity([0, 1, 2], universe=3)


def test_uniformity_detects_skew():
    flat = [1000] * 10
    skew = [1300] + [966] * 9
    assert chi_square_uniformity(flat)[1] > 0.9
    assert chi_square_uniformity(skew)[1] < 1e-6


def test_survival_agrees_with_exact_even_df():
    # for even df the survival function has a closed form
    for df in (4, 6, 10):
        for x in (1.0, 5.0, 12.0):
            k = df // 2
            exact = math.exp(-x / 2) * sum((x / 2) ** j / math.factorial(j)
                                           for j in range(k))
            assert chisq_survival(x, df) == pytest.approx(exact, abs=7e-3)
