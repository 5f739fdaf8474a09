"""Proper edge coloring with max_degree+1 colors, and extraction of a
spanning subgraph with all degrees in {2,3} from a regular graph.

The coloring follows the classic fan-rotation scheme: grow a maximal fan
around one endpoint of the uncolored edge, flip one two-colored alternating
path, rotate a prefix of the fan, and drop the remaining free color on the
last fan edge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph, GraphError


def _e(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class EdgeColoring:
    """A proper edge coloring: adjacent edges never share a color."""

    colors: dict[tuple[int, int], int]
    num_colors: int

    def class_sizes(self) -> list[int]:
        sizes = [0] * self.num_colors
        for c in self.colors.values():
            sizes[c] += 1
        return sizes

    def validate(self, g: Graph) -> None:
        if set(self.colors) != set(g.edges()):
            raise GraphError("coloring does not cover exactly the edges of g")
        if self.num_colors > g.max_degree() + 1:
            raise GraphError("too many colors")
        seen: dict[tuple[int, int], tuple[int, int]] = {}
        for (u, v), c in self.colors.items():
            if not 0 <= c < self.num_colors:
                raise GraphError(f"color {c} out of range")
            for end in (u, v):
                if (end, c) in seen:
                    raise GraphError(f"color {c} repeats at vertex {end}")
                seen[(end, c)] = (u, v)


def vizing_color(g: Graph) -> EdgeColoring:
    """Proper edge coloring using at most max_degree(g)+1 colors."""
    n = g.n
    k = g.max_degree() + 1
    ecol: dict[tuple[int, int], int] = {}
    # mate[v, c] = the neighbor joined to v by a c-colored edge, -1 if none
    mate = np.full((n, k), -1, dtype=np.int64)

    def free(v: int) -> int:
        for c in range(k):
            if mate[v, c] == -1:
                return c
        raise AssertionError("no free color; degree bound violated")

    def assign(u: int, v: int, c: int) -> None:
        ecol[_e(u, v)] = c
        mate[u, c] = v
        mate[v, c] = u

    def unassign(u: int, v: int) -> int:
        c = ecol.pop(_e(u, v))
        mate[u, c] = -1
        mate[v, c] = -1
        return c

    def invert_path(v: int, c1: int, c2: int) -> None:
        # flip the maximal alternating path that leaves v by color c1
        chain: list[tuple[int, int]] = []
        x, c = v, c1
        while True:
            y = int(mate[x, c])
            if y == -1:
                break
            chain.append((x, y))
            x, c = y, (c2 if c == c1 else c1)
        flipped = [(c2 if ecol[_e(a, b)] == c1 else c1, a, b) for a, b in chain]
        for a, b in chain:
            unassign(a, b)
        for c, a, b in flipped:
            assign(a, b, c)

    for u, v in g.edges():
        # maximal fan around u starting at v
        fan = [v]
        in_fan = {v}
        while True:
            cf = free(fan[-1])
            w = int(mate[u, cf])
            if w == -1 or w in in_fan:
                break
            fan.append(w)
            in_fan.add(w)
        c = free(u)
        d = free(fan[-1])
        if c != d and mate[u, d] != -1:
            invert_path(u, d, c)
        # pick the first fan prefix that is still a fan and ends where d is free
        w_idx = None
        for i, x in enumerate(fan):
            if mate[x, d] != -1:
                continue
            ok = True
            for j in range(i):
                cj = ecol[_e(u, fan[j + 1])]
                if mate[fan[j], cj] != -1:
                    ok = False
                    break
            if ok:
                w_idx = i
                break
        if w_idx is None:
            raise AssertionError("fan rotation failed; coloring invariant broken")
        shift = [unassign(u, fan[j + 1]) for j in range(w_idx)]
        for j in range(w_idx):
            assign(u, fan[j], shift[j])
        assign(u, fan[w_idx], d)
    return EdgeColoring(ecol, k)


def _pick_classes(sizes: list[int], take: int = 3) -> list[int]:
    """Indices of the `take` largest classes, ties broken toward low index."""
    order = sorted(range(len(sizes)), key=lambda i: (-sizes[i], i))
    return sorted(order[:take])


def extract_two_three(g: Graph, coloring: EdgeColoring | None = None) -> Graph:
    """Spanning subgraph with every degree in {2,3}.

    A 2-regular graph is returned unchanged.  For d-regular g with d >= 3,
    take the three largest classes of a (d+1)-edge-coloring: each vertex
    misses at most one class, so its degree lands in {2,3}.
    """
    d = g.max_degree()
    if d != g.min_degree():
        raise GraphError("extraction requires a regular graph")
    if d < 2:
        raise GraphError("need degree at least 2")
    if d == 2:
        return g
    if coloring is None:
        coloring = vizing_color(g)
    chosen = set(_pick_classes(coloring.class_sizes(), 3))
    sub = Graph(g.n, [e for e, c in coloring.colors.items() if c in chosen])
    assert sub.min_degree() >= 2 and sub.max_degree() <= 3
    return sub
