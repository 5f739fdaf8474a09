from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamfactor.bruteforce import enumerate_two_factors
from hamfactor.graphs import (
    CycleCover,
    EdgeListFormatError,
    Graph,
    GraphError,
    HamCycle,
    NearTwoFactor,
    cycle_decomposition,
    delete_edge,
    format_edge_list,
    parse_cycle_file,
    parse_edge_list,
    verify_cycle_in_graph,
    verify_ham_cycle,
)

from helpers import cycle_graph, petersen, two_triangles


def test_graph_basics():
    g = Graph(4, [(0, 1), (2, 1), (3, 0)])
    assert g.m == 3
    assert g.neighbors(1) == (0, 2)
    assert g.degree(0) == 2 and g.degree(3) == 1
    assert g.has_edge(1, 0) and g.has_edge(0, 1)
    assert not g.has_edge(1, 3)
    assert list(g.edges()) == [(0, 1), (0, 3), (1, 2)]
    assert g.min_degree() == 1 and g.max_degree() == 2


def test_graph_rejects_bad_edges():
    with pytest.raises(GraphError):
        Graph(3, [(0, 0)])
    with pytest.raises(GraphError):
        Graph(3, [(0, 1), (1, 0)])
    with pytest.raises(GraphError):
        Graph(3, [(0, 3)])
    with pytest.raises(GraphError):
        Graph(-1, [])


def test_regularity_checks():
    assert cycle_graph(5).is_regular(2)
    assert petersen().is_regular(3)
    assert not two_triangles().is_regular(3)


# ---- cycle decomposition ----


def test_decomposition_canonical_orientation():
    cover = cycle_decomposition(cycle_graph(6))
    assert cover.k == 1
    assert list(cover.cycles[0]) == [0, 1, 2, 3, 4, 5]
    assert int(cover.succ[5]) == 0 and int(cover.pred[0]) == 5
    cover.validate()


def test_decomposition_two_components():
    cover = cycle_decomposition(two_triangles())
    assert cover.cycle_lengths() == [3, 3]
    assert int(cover.cycle_id[4]) == 1
    assert cover.small_cycles(4) == {0, 1}
    assert cover.small_cycles(3) == set()
    cover.validate()


def test_decomposition_requires_two_regular():
    with pytest.raises(GraphError):
        cycle_decomposition(petersen())


def test_cover_edge_set_roundtrip():
    g = two_triangles()
    cover = cycle_decomposition(g)
    assert cover.edge_set() == set(g.edges())
    assert cover.to_graph() == g


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=6, max_value=7), st.data())
def test_decomposition_matches_enumerated_factors(n, data):
    factors = enumerate_two_factors(n)
    edges = sorted(data.draw(st.sampled_from(factors)).edge_set())
    cover = cycle_decomposition(Graph(n, edges))
    cover.validate()
    assert cover.edge_set() == set(edges)
    assert sum(cover.cycle_lengths()) == n


# ---- delete / restore ----


def test_delete_edge_opens_path():
    cover = cycle_decomposition(cycle_graph(5))
    ntf = delete_edge(cover, (0, 4))
    ntf.validate()
    path, cycles = ntf.components()
    assert cycles == []
    assert path in ([0, 1, 2, 3, 4], [4, 3, 2, 1, 0])
    assert ntf.degree(0) == 1 and ntf.degree(2) == 2


def test_delete_edge_missing_edge():
    cover = cycle_decomposition(cycle_graph(5))
    with pytest.raises(GraphError):
        delete_edge(cover, (0, 2))


def test_restore_is_exact_inverse():
    cover = cycle_decomposition(two_triangles())
    for edge in [(0, 1), (1, 2), (3, 5)]:
        back = delete_edge(cover, edge).restore_edge()
        assert np.array_equal(back.succ, cover.succ)
        assert np.array_equal(back.pred, cover.pred)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=6, max_value=7), st.data())
def test_restore_inverse_property(n, data):
    factors = enumerate_two_factors(n)
    cover = data.draw(st.sampled_from(factors))
    edge = data.draw(st.sampled_from(sorted(cover.edge_set())))
    restored = delete_edge(cover, edge).restore_edge()
    assert np.array_equal(restored.succ, cover.succ)
    assert np.array_equal(restored.pred, cover.pred)
    assert [list(c) for c in restored.cycles] == [list(c) for c in cover.cycles]


def test_near_two_factor_walk_and_neighbors():
    cover = cycle_decomposition(two_triangles())
    ntf = delete_edge(cover, (1, 2))
    path, cycles = ntf.components()
    assert sorted(path) == [0, 1, 2]
    assert [sorted(c) for c in cycles] == [[3, 4, 5]]
    assert ntf.path_edge_count() == 2
    assert ntf.small_cycle_lengths(4) == [3]
    assert ntf.small_cycle_lengths(3) == []
    mid = path[1]
    assert len(ntf.neighbors_of(mid)) == 2


# ---- Hamilton-cycle verification ----


def test_verify_against_cover_and_extras():
    cover = cycle_decomposition(two_triangles())
    h = HamCycle((0, 1, 2, 3, 4, 5))
    # needs the two bridging edges 2-3 and 5-0
    assert not verify_ham_cycle(h, cover)
    assert verify_ham_cycle(h, cover, extra_edges={(2, 3), (0, 5)})
    assert not verify_ham_cycle(h, cover, extra_edges={(2, 3)})


def test_verify_rejects_non_permutations():
    cover = cycle_decomposition(cycle_graph(5))
    assert verify_ham_cycle(HamCycle((0, 1, 2, 3, 4)), cover)
    assert verify_ham_cycle(HamCycle((2, 3, 4, 0, 1)), cover)
    assert not verify_ham_cycle(HamCycle((0, 1, 2, 3, 3)), cover)
    assert not verify_ham_cycle(HamCycle((0, 1, 2, 3)), cover)


def test_verify_cycle_in_graph():
    assert verify_cycle_in_graph(HamCycle((0, 1, 2, 3, 4)), cycle_graph(5))
    assert not verify_cycle_in_graph(HamCycle((0, 2, 1, 3, 4)), cycle_graph(5))


# ---- text formats ----


def test_edge_list_roundtrip():
    g = petersen()
    assert parse_edge_list(format_edge_list(g)) == g


def test_edge_list_comments_and_blanks():
    text = "# sample\n\n3 2\n0 1\n# middle\n1 2\n"
    g = parse_edge_list(text)
    assert g.n == 3 and g.m == 2


@pytest.mark.parametrize(
    "text,line",
    [
        ("", 1),
        ("3\n0 1\n", 1),
        ("3 1\n0 1 2\n", 2),
        ("3 1\nx y\n", 2),
        ("3 1\n1 0\n", 2),
        ("3 1\n0 1\n1 2\n", 3),
        ("# c\n3 2\n0 1\n", 3),
    ],
)
def test_edge_list_errors_carry_line_numbers(text, line):
    with pytest.raises(EdgeListFormatError) as err:
        parse_edge_list(text)
    assert err.value.line_no == line
    assert f"line {line}:" in str(err.value)


def test_parse_cycle_file():
    h = parse_cycle_file("0 1 2\n3 4\n", 5)
    assert h.order == (0, 1, 2, 3, 4)
    with pytest.raises(GraphError):
        parse_cycle_file("0 1 2", 5)
    with pytest.raises(GraphError):
        parse_cycle_file("0 1 a", 3)
