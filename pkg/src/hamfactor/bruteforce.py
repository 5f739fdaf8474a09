"""Exhaustive reference algorithms, kept deliberately independent of the
main pipeline.  Everything here is exponential and only meant for small n;
the test suite uses these as ground truth for the fast code paths.
"""

from __future__ import annotations

import math
from typing import Iterator, Sequence

from .graphs import CycleCover, Graph, HamCycle, cycle_decomposition


def held_karp(g: Graph) -> HamCycle | None:
    """Bitmask dynamic program for a Hamilton cycle.  O(2^n * n * d).

    Returns one cycle anchored at vertex 0, or None if the graph has none.
    """
    n = g.n
    if n < 3:
        return None
    if n > 22:
        raise ValueError("held_karp is exponential; refusing n > 22")
    if g.min_degree() < 2:
        return None
    adj = [0] * n
    for u in range(n):
        for v in g.neighbors(u):
            adj[u] |= 1 << v
    full = (1 << n) - 1
    # dp[mask] = set of endpoints v (as a bitmask) reachable by a path that
    # starts at 0 and covers exactly mask; only masks containing 0 are used
    dp = [0] * (1 << n)
    dp[1] = 1
    for mask in range(1, full + 1, 2):
        ends = dp[mask]
        while ends:
            low = ends & -ends
            v = low.bit_length() - 1
            ends ^= low
            free = adj[v] & ~mask
            while free:
                wlow = free & -free
                free ^= wlow
                dp[mask | wlow] |= wlow
    closing = dp[full] & adj[0]
    if not closing:
        return None
    v = (closing & -closing).bit_length() - 1
    order = [v]
    mask = full
    while v != 0:
        pmask = mask & ~(1 << v)
        prevs = dp[pmask] & adj[v]
        assert prevs, "dp table inconsistent"
        v = (prevs & -prevs).bit_length() - 1
        order.append(v)
        mask = pmask
    order.reverse()
    return HamCycle(tuple(order))


def backtracking_hamilton(g: Graph) -> HamCycle | None:
    """Depth-first search for a Hamilton cycle; cross-checks held_karp."""
    n = g.n
    if n < 3 or g.min_degree() < 2:
        return None
    used = [False] * n
    used[0] = True
    order = [0]

    def dfs() -> bool:
        if len(order) == n:
            return g.has_edge(order[-1], 0)
        v = order[-1]
        for w in g.neighbors(v):
            if used[w]:
                continue
            # a vertex whose free degree drops to 0 can never be reached later
            used[w] = True
            order.append(w)
            if dfs():
                return True
            order.pop()
            used[w] = False
        return False

    return HamCycle(tuple(order)) if dfs() else None


# ---- 2-factors of the complete graph ---------------------------------------


def count_two_factors(n: int) -> int:
    """Number of 2-regular labeled graphs on n vertices, by the cycle-type sum.

    Each partition of n into parts >= 3 contributes
    n! / (2^k * prod(parts) * prod(multiplicity!)).
    """
    if n < 3:
        return 0
    total = 0
    for parts in _partitions_min3(n):
        k = len(parts)
        denom = 2 ** k
        for c in parts:
            denom *= c
        mult: dict[int, int] = {}
        for c in parts:
            mult[c] = mult.get(c, 0) + 1
        for cnt in mult.values():
            denom *= math.factorial(cnt)
        total += math.factorial(n) // denom
    return total


def _partitions_min3(n: int, largest: int | None = None) -> Iterator[tuple[int, ...]]:
    if largest is None:
        largest = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 2, -1):
        if n - first in (1, 2):
            continue
        for rest in _partitions_min3(n - first, first):
            yield (first,) + rest


def enumerate_two_factors(n: int) -> list[CycleCover]:
    """All 2-regular graphs on [n] as covers, each produced exactly once.

    Every cycle is rooted at its smallest member and reflections are broken
    by ordering the root's neighbors, so no 2-factor repeats.
    """
    if n > 9:
        raise ValueError("enumeration is factorial; refusing n > 9")
    out: list[CycleCover] = []

    def build(remaining: list[int], acc: list[tuple[int, int]]):
        if not remaining:
            out.append(cycle_decomposition(Graph(n, acc)))
            return
        s = remaining[0]
        pool = remaining[1:]
        # choose an ordered cycle s -> v1 -> ... -> v_{k-1} -> s with v1 < v_{k-1}
        def extend(seq: list[int], rest: list[int]):
            if len(seq) >= 3 and seq[1] < seq[-1]:
                edges = [(min(a, b), max(a, b))
                         for a, b in zip(seq, seq[1:] + [s])]
                build(rest, acc + edges)
            for i, v in enumerate(rest):
                extend(seq + [v], rest[:i] + rest[i + 1:])

        extend([s], pool)

    build(list(range(n)), [])
    return out


# ---- chi-square goodness of fit ---------------------------------------------


def chisq_survival(x: float, df: int) -> float:
    """Upper-tail probability of the chi-square distribution.

    Wilson-Hilferty cube-root normal approximation; accurate to about 1e-3
    for df >= 3, which is all the goodness-of-fit checks need.
    """
    if df <= 0:
        raise ValueError("df must be positive")
    if x <= 0:
        return 1.0
    c = 2.0 / (9.0 * df)
    z = ((x / df) ** (1.0 / 3.0) - 1.0 + c) / math.sqrt(c)
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def chi_square_uniformity(samples: Sequence[int],
                          universe: int | None = None) -> tuple[float, float]:
    """(statistic, p-value) against the uniform distribution.

    With `universe` given, `samples` are raw category indices in
    range(universe); without it they are per-category counts.  Requires at
    least ten observations per category on average.
    """
    if universe is None:
        counts = [int(c) for c in samples]
    else:
        binned = [0] * universe
        for s in samples:
            binned[s] += 1
        counts = binned
    k = len(counts)
    if k < 2:
        raise ValueError("need at least two categories")
    total = float(sum(counts))
    if total < 10 * k:
        raise ValueError(f"undersampled: {total:.0f} draws for {k} categories")
    e = total / k
    stat = sum((c - e) ** 2 for c in counts) / e
    return stat, chisq_survival(stat, k - 1)
