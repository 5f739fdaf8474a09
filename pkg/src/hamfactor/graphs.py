"""Core graph types: simple graphs, cycle covers, near-2-factors, Hamilton cycles.

Vertices are dense integers 0..n-1 throughout.  Cycle covers keep an explicit
orientation (successor/predecessor arrays) so that positions along a cycle are
well defined and reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np


class GraphError(ValueError):
    """Raised when a structure violates its declared invariants."""


class EdgeListFormatError(ValueError):
    """Raised by the edge-list parser; carries a 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _as_edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


# ---- simple undirected graph ----------------------------------------------


class Graph:
    """Immutable simple undirected graph with sorted adjacency lists."""

    __slots__ = ("n", "_adj", "_sets", "_m", "_degree_bounds")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]]):
        if n < 0:
            raise GraphError("vertex count must be nonnegative")
        adj: list[list[int]] = [[] for _ in range(n)]
        seen: set[tuple[int, int]] = set()
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u},{v}) out of range for n={n}")
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            e = _as_edge(u, v)
            if e in seen:
                raise GraphError(f"duplicate edge {e}")
            seen.add(e)
            adj[u].append(v)
            adj[v].append(u)
        self.n = n
        self._adj: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(a)) for a in adj)
        self._sets: tuple[frozenset[int], ...] = tuple(frozenset(a) for a in adj)
        self._m = len(seen)
        degs = [len(a) for a in adj]
        self._degree_bounds = (min(degs, default=0), max(degs, default=0))

    @property
    def m(self) -> int:
        return self._m

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._sets[u]

    def edges(self) -> Iterator[tuple[int, int]]:
        for u in range(self.n):
            for v in self._adj[u]:
                if u < v:
                    yield (u, v)

    def min_degree(self) -> int:
        return self._degree_bounds[0]

    def max_degree(self) -> int:
        return self._degree_bounds[1]

    def is_regular(self, d: int) -> bool:
        return all(len(a) == d for a in self._adj)

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self._adj == other._adj

    def __hash__(self) -> int:
        return hash((self.n, self._adj))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self._m})"


# ---- cycle cover (2-factor) -------------------------------------------------


@dataclass(frozen=True)
class CycleCover:
    """A spanning disjoint union of cycles, each of length >= 3.

    succ/pred give one consistent orientation per cycle; cycle_id[v] indexes
    into cycles/cycle_lengths; pos[v] is the offset of v inside its cycle
    array.  All arrays have length n.
    """

    succ: np.ndarray
    pred: np.ndarray
    cycle_id: np.ndarray
    cycles: tuple[np.ndarray, ...]
    pos: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.pos is None:
            pos = np.empty(self.n, dtype=np.int32)
            for arr in self.cycles:
                pos[arr] = np.arange(len(arr), dtype=np.int32)
            object.__setattr__(self, "pos", pos)

    @property
    def n(self) -> int:
        return len(self.succ)

    @property
    def k(self) -> int:
        return len(self.cycles)

    def cycle_lengths(self) -> list[int]:
        return [len(c) for c in self.cycles]

    def validate(self) -> None:
        n = self.n
        if self.cycles and min(len(c) for c in self.cycles) < 3:
            raise GraphError("cycle of length < 3 in cover")
        if sum(len(c) for c in self.cycles) != n:
            raise GraphError("cycles do not partition the vertex set")
        for arr in self.cycles:
            for i, v in enumerate(arr):
                w = arr[(i + 1) % len(arr)]
                if self.succ[v] != w or self.pred[w] != v:
                    raise GraphError("succ/pred inconsistent with cycle arrays")
        if not np.array_equal(self.succ[self.pred], np.arange(n)):
            raise GraphError("pred is not the inverse of succ")

    def has_edge(self, u: int, v: int) -> bool:
        return self.succ[u] == v or self.succ[v] == u

    def edge_set(self) -> set[tuple[int, int]]:
        return {_as_edge(v, int(self.succ[v])) for v in range(self.n)}

    def small_cycles(self, cutoff: int) -> set[int]:
        """Indices of cycles with fewer than `cutoff` edges."""
        return {i for i, c in enumerate(self.cycles) if len(c) < cutoff}

    def to_graph(self) -> Graph:
        return Graph(self.n, self.edge_set())


def cycle_decomposition(g: Graph) -> CycleCover:
    """Decompose a 2-regular graph into its cycles.

    Orientation is canonical: each cycle starts at its smallest vertex and
    proceeds toward that vertex's smaller neighbor, so equal graphs produce
    identical covers.
    """
    if not g.is_regular(2):
        raise GraphError("cycle decomposition requires a 2-regular graph")
    n = g.n
    succ = np.full(n, -1, dtype=np.int32)
    pred = np.full(n, -1, dtype=np.int32)
    cycle_id = np.full(n, -1, dtype=np.int32)
    cycles: list[np.ndarray] = []
    seen = np.zeros(n, dtype=bool)
    for start in range(n):
        if seen[start]:
            continue
        order = [start]
        seen[start] = True
        prev = start
        cur = min(g.neighbors(start))
        while cur != start:
            order.append(cur)
            seen[cur] = True
            a, b = g.neighbors(cur)
            nxt = b if a == prev else a
            prev, cur = cur, nxt
        arr = np.array(order, dtype=np.int32)
        if len(arr) < 3:
            raise GraphError("2-regular graph contains a cycle shorter than 3")
        cid = len(cycles)
        for i, v in enumerate(order):
            succ[v] = order[(i + 1) % len(order)]
            pred[v] = order[i - 1]
            cycle_id[v] = cid
        cycles.append(arr)
    return CycleCover(succ=succ, pred=pred, cycle_id=cycle_id, cycles=tuple(cycles))


# ---- near-2-factor ----------------------------------------------------------


@dataclass
class NearTwoFactor:
    """One path plus disjoint cycles covering the vertex set.

    nxt/prv keep the cover's orientation where edges are untouched; the
    missing edge of the path is marked with -1 at both open ends.  This is
    the readable reference structure; hot loops use an array-backed state
    elsewhere and are cross-checked against this one.
    """

    nxt: np.ndarray
    prv: np.ndarray
    endpoints: tuple[int, int]

    @property
    def n(self) -> int:
        return len(self.nxt)

    def degree(self, v: int) -> int:
        return int(self.nxt[v] != -1) + int(self.prv[v] != -1)

    def neighbors_of(self, v: int) -> tuple[int, ...]:
        out = []
        if self.prv[v] != -1:
            out.append(int(self.prv[v]))
        if self.nxt[v] != -1:
            out.append(int(self.nxt[v]))
        return tuple(out)

    def path_vertices(self) -> list[int]:
        """Path order from endpoints[0] to endpoints[1]."""
        a, b = self.endpoints
        out = [a]
        cur = a
        came = -1
        while cur != b:
            cand = [w for w in self.neighbors_of(cur) if w != came]
            if len(cand) != 1:
                raise GraphError("path walk failed; structure corrupt")
            came, cur = cur, cand[0]
            out.append(cur)
        return out

    def components(self) -> tuple[list[int], list[list[int]]]:
        """(path order, list of cycle orders)."""
        path = self.path_vertices()
        cyc: list[list[int]] = []
        seen: set[int] = set(path)
        for v in range(self.n):
            if v in seen:
                continue
            order = [v]
            seen.add(v)
            cur = int(self.nxt[v])
            while cur != v:
                order.append(cur)
                seen.add(cur)
                cur = int(self.nxt[cur])
            cyc.append(order)
        assert len(seen) == self.n
        return path, cyc

    def path_edge_count(self) -> int:
        return len(self.path_vertices()) - 1

    def small_cycle_lengths(self, cutoff: int) -> list[int]:
        _, cyc = self.components()
        return sorted(len(c) for c in cyc if len(c) < cutoff)

    def validate(self) -> None:
        a, b = self.endpoints
        if self.degree(a) != 1 or self.degree(b) != 1:
            raise GraphError("path endpoints must have degree 1")
        ends = [v for v in range(self.n) if self.degree(v) == 1]
        if sorted(ends) != sorted((a, b)):
            raise GraphError("unexpected set of degree-1 vertices")
        path, cyc = self.components()
        if len(path) < 2:
            raise GraphError("path must carry at least one edge")
        for c in cyc:
            if len(c) < 3:
                raise GraphError("cycle component shorter than 3")

    def copy(self) -> "NearTwoFactor":
        return NearTwoFactor(self.nxt.copy(), self.prv.copy(), self.endpoints)

    def edge_set(self) -> set[tuple[int, int]]:
        out = set()
        for v in range(self.n):
            w = int(self.nxt[v])
            if w != -1:
                out.add(_as_edge(v, w))
        return out

    def restore_edge(self) -> CycleCover:
        """Close the path back into a cycle by re-adding its missing edge.

        Inverse of delete_edge: succ/pred maps come back exactly.
        """
        a, b = self.endpoints
        nxt = self.nxt.copy()
        prv = self.prv.copy()
        # the open ends tell us the orientation of the missing edge
        if nxt[a] == -1 and prv[b] == -1:
            nxt[a] = b
            prv[b] = a
        elif nxt[b] == -1 and prv[a] == -1:
            nxt[b] = a
            prv[a] = b
        else:
            raise GraphError("endpoints do not bound a single missing edge")
        return _cover_from_links(nxt, prv)


def _cover_from_links(nxt: np.ndarray, prv: np.ndarray) -> CycleCover:
    n = len(nxt)
    cycle_id = np.full(n, -1, dtype=np.int32)
    cycles: list[np.ndarray] = []
    for v in range(n):
        if cycle_id[v] != -1:
            continue
        order = [v]
        cur = int(nxt[v])
        while cur != v:
            order.append(cur)
            cur = int(nxt[cur])
        cid = len(cycles)
        arr = np.array(order, dtype=np.int32)
        cycle_id[arr] = cid
        cycles.append(arr)
    return CycleCover(succ=nxt.astype(np.int32), pred=prv.astype(np.int32),
                      cycle_id=cycle_id, cycles=tuple(cycles))


def delete_edge(cover: CycleCover, edge: tuple[int, int]) -> NearTwoFactor:
    """Remove one cover edge, opening its cycle into a path."""
    u, v = edge
    if cover.succ[u] == v:
        a, b = u, v
    elif cover.succ[v] == u:
        a, b = v, u
    else:
        raise GraphError(f"edge {edge} not in cover")
    nxt = cover.succ.copy()
    prv = cover.pred.copy()
    nxt[a] = -1
    prv[b] = -1
    ntf = NearTwoFactor(nxt=nxt, prv=prv, endpoints=(a, b))
    if len(cover.cycles[cover.cycle_id[a]]) < 3:
        raise GraphError("cover cycle shorter than 3")
    return ntf


# ---- Hamilton cycles --------------------------------------------------------


@dataclass(frozen=True)
class HamCycle:
    """A claimed Hamilton cycle, stored as a vertex order."""

    order: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.order)

    def edges(self) -> Iterator[tuple[int, int]]:
        o = self.order
        for i in range(len(o)):
            yield _as_edge(o[i], o[(i + 1) % len(o)])

    def is_permutation(self) -> bool:
        return sorted(self.order) == list(range(len(self.order)))


def verify_ham_cycle(h: HamCycle, f: CycleCover,
                     extra_edges: set[tuple[int, int]] | None = None) -> bool:
    """Check h is a Hamilton cycle of the cover plus a set of extra edges.

    Every consecutive pair must be an edge of f or a member of extra_edges
    (normally the relabeled edges certified by the exposure log).  With
    extra_edges omitted, f alone must carry the cycle.
    """
    if h.n != f.n or h.n < 3 or not h.is_permutation():
        return False
    allowed = extra_edges or set()
    for e in h.edges():
        if not f.has_edge(*e) and e not in allowed:
            return False
    return True


def verify_cycle_in_graph(h: HamCycle, g: Graph) -> bool:
    """Plain graph-membership check: h is a Hamilton cycle of g."""
    if h.n != g.n or h.n < 3 or not h.is_permutation():
        return False
    return all(g.has_edge(u, v) for u, v in h.edges())


# ---- edge-list text format --------------------------------------------------


def parse_edge_list(text: str) -> Graph:
    """Parse the `n m` / `u v` edge-list format, reporting line numbers on error."""
    lines = text.splitlines()
    idx = 0
    header = None
    for idx, raw in enumerate(lines):
        s = raw.strip()
        if s and not s.startswith("#"):
            header = (idx + 1, s)
            break
    if header is None:
        raise EdgeListFormatError(1, "missing `n m` header")
    line_no, s = header
    parts = s.split()
    if len(parts) != 2:
        raise EdgeListFormatError(line_no, f"expected `n m`, got {s!r}")
    try:
        n, m = int(parts[0]), int(parts[1])
    except ValueError:
        raise EdgeListFormatError(line_no, f"non-integer header {s!r}") from None
    if n < 0 or m < 0:
        raise EdgeListFormatError(line_no, "negative n or m")
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for j in range(idx + 1, len(lines)):
        s = lines[j].strip()
        if not s or s.startswith("#"):
            continue
        parts = s.split()
        if len(parts) != 2:
            raise EdgeListFormatError(j + 1, f"expected `u v`, got {s!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListFormatError(j + 1, f"non-integer endpoints {s!r}") from None
        if not (0 <= u < v < n):
            raise EdgeListFormatError(j + 1, f"require 0 <= u < v < n, got {u} {v}")
        if (u, v) in seen:
            raise EdgeListFormatError(j + 1, f"duplicate edge {u} {v}")
        seen.add((u, v))
        edges.append((u, v))
        if len(edges) > m:
            raise EdgeListFormatError(j + 1, f"more than the declared {m} edges")
    if len(edges) != m:
        raise EdgeListFormatError(len(lines) or 1,
                                  f"declared {m} edges, found {len(edges)}")
    return Graph(n, edges)


def format_edge_list(g: Graph) -> str:
    out = [f"{g.n} {g.m}"]
    out.extend(f"{u} {v}" for u, v in g.edges())
    return "\n".join(out) + "\n"


def parse_cycle_file(text: str, n: int) -> HamCycle:
    """Parse a whitespace-separated vertex order as a claimed Hamilton cycle."""
    toks = text.split()
    try:
        order = tuple(int(t) for t in toks)
    except ValueError as exc:
        raise GraphError(f"non-integer vertex token: {exc}") from None
    if len(order) != n:
        raise GraphError(f"cycle lists {len(order)} vertices, graph has {n}")
    return HamCycle(order)
