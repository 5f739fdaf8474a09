"""Instance generators: random regular graphs, random 2-factors, and the
deterministic worst-case families used in the experiment grids.
"""

from __future__ import annotations

import numpy as np

from .graphs import CycleCover, Graph, cycle_decomposition


def _pairing_attempt(n: int, d: int, rng: np.random.Generator):
    """One configuration-model draw; None when it collapses a loop or a
    parallel edge."""
    stubs = np.repeat(np.arange(n, dtype=np.int64), d)
    rng.shuffle(stubs)
    u = stubs[0::2]
    v = stubs[1::2]
    if np.any(u == v):
        return None
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    key = lo * n + hi
    if len(np.unique(key)) != len(key):
        return None
    return list(zip(lo.tolist(), hi.tolist()))


def sample_regular(n: int, d: int, rng: np.random.Generator,
                   max_tries: int = 100_000) -> Graph:
    """Uniform random simple d-regular graph via pairing with rejection.

    Conditioning on simplicity keeps the distribution uniform; the
    acceptance rate tends to exp(-(d*d-1)/4), so retries stay cheap for the
    small degrees this library targets.
    """
    if n < 3:
        raise ValueError(f"need n >= 3, got n={n}")
    if d < 1 or d >= n:
        raise ValueError(f"need 1 <= d < n, got d={d}, n={n}")
    if (n * d) % 2 != 0:
        raise ValueError("n*d must be even")
    for _ in range(max_tries):
        edges = _pairing_attempt(n, d, rng)
        if edges is not None:
            return Graph(n, edges)
    raise RuntimeError(f"pairing rejection did not converge in {max_tries} tries")


def sample_two_factor(n: int, rng: np.random.Generator, mode: str = "pairing",
                      max_tries: int = 100_000) -> CycleCover:
    """Random spanning cycle cover of [n].

    mode="pairing" is uniform over all 2-regular graphs (acceptance rate
    tends to exp(-3/4)).  mode="permutation" projects a uniform permutation
    with no cycle shorter than 3 onto its undirected diagram; that law
    overweights covers with many cycles (a cover with k cycles arises from
    2^k permutations) and is kept only as a contrast distribution.
    """
    if n < 3:
        raise ValueError("a cycle cover needs n >= 3")
    if mode == "pairing":
        g = sample_regular(n, 2, rng, max_tries=max_tries)
        return cycle_decomposition(g)
    if mode == "permutation":
        for _ in range(max_tries):
            perm = rng.permutation(n)
            if _min_cycle_len(perm) < 3:
                continue
            g = Graph(n, [(i, int(perm[i])) for i in range(n)])
            return cycle_decomposition(g)
        raise RuntimeError(f"no loopless permutation in {max_tries} tries")
    raise ValueError(f"unknown mode {mode!r}")


def _min_cycle_len(perm: np.ndarray) -> int:
    n = len(perm)
    seen = np.zeros(n, dtype=bool)
    best = n
    for s in range(n):
        if seen[s]:
            continue
        length = 0
        cur = s
        while not seen[cur]:
            seen[cur] = True
            cur = int(perm[cur])
            length += 1
        best = min(best, length)
        if best < 3:
            return best
    return best


# ---- deterministic families --------------------------------------------------


def deterministic_family(name: str, n: int, d: int = 3) -> Graph:
    """Structured d-regular graphs: 'cliques', 'circulant', or 'prism'.

    cliques: disjoint copies of the complete graph on d+1 vertices, the
    extreme case of many small components; needs (d+1) | n.
    circulant: vertex i joined to i +- 1..d/2 (plus the antipode when d is
    odd), a single fat cycle.
    prism: two concentric cycles joined by rungs, 3-regular, n even.
    """
    if name == "cliques":
        k = d + 1
        if n % k != 0:
            raise ValueError(f"cliques family needs {k} | n")
        edges = []
        for b in range(0, n, k):
            edges.extend((b + i, b + j) for i in range(k) for j in range(i + 1, k))
        return Graph(n, edges)
    if name == "circulant":
        if d >= n:
            raise ValueError("degree too large")
        half = d // 2
        if n <= 2 * half:
            raise ValueError("degree too large for circulant")
        edges = set()
        for off in range(1, half + 1):
            for i in range(n):
                edges.add(tuple(sorted((i, (i + off) % n))))
        if d % 2 == 1:
            if n % 2 != 0:
                raise ValueError("odd-degree circulant needs even n")
            for i in range(n // 2):
                edges.add((i, i + n // 2))
        g = Graph(n, edges)
        if not g.is_regular(d):
            raise ValueError(f"circulant parameters give no {d}-regular graph")
        return g
    if name == "prism":
        if n % 2 != 0 or n < 6:
            raise ValueError("prism needs even n >= 6")
        h = n // 2
        edges = [(i, (i + 1) % h) for i in range(h)]
        edges += [(h + i, h + (i + 1) % h) for i in range(h)]
        edges += [(i, h + i) for i in range(h)]
        return Graph(n, edges)
    raise ValueError(f"unknown family {name!r}")
