"""Lazy exposure of a hidden uniform relabeling.

The pipeline never sees the whole relabeling pi.  It may ask for the image
of a source vertex or the preimage of a target vertex; every fresh answer
is logged and counts one exposure against the budget, and re-queries are
free.  pi itself is sampled up front from a dedicated stream and kept
hidden, so a run is exactly reproducible while the algorithm still only
pays for what it inspects; because pi is uniform, each fresh answer is
uniform over the unexposed complement given everything revealed so far.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import Graph


class BudgetExceeded(RuntimeError):
    """Raised when a query would exceed the exposure budget."""

    def __init__(self, budget: int):
        super().__init__(f"exposure budget of {budget} exhausted")
        self.budget = budget


@dataclass(frozen=True)
class ExposureRecord:
    kind: str  # "img" for an image query, "pre" for a preimage query
    query: int
    result: int


def default_budget(n: int, beta: float = 20.0) -> int:
    """ceil(beta * n^(3/4) * ln n) fresh exposures."""
    if n < 2:
        return n
    return math.ceil(beta * n ** 0.75 * math.log(n))


class ExposureOracle:
    """Incremental access to a hidden bijection of [n] onto itself.

    Sources are graph-side vertices, targets are cover-side vertices.  The
    count of exposed pairs equals the count of distinct exposed targets and
    of distinct exposed sources.
    """

    def __init__(self, n: int, rng: np.random.Generator | None = None,
                 hidden=None, budget: int | None = None):
        if hidden is None:
            if rng is None:
                raise ValueError("need an rng to sample pi, or an explicit hidden map")
            hidden = rng.permutation(n)
        hidden = np.asarray(hidden, dtype=np.int64)
        if len(hidden) != n or not np.array_equal(np.sort(hidden), np.arange(n)):
            raise ValueError("hidden must be a permutation of range(n)")
        self.n = n
        self.budget = default_budget(n) if budget is None else budget
        self.log: list[ExposureRecord] = []
        self._hidden = hidden
        self._hidden_inv = np.argsort(hidden)
        # exposed restrictions of the bijection, -1 where still hidden
        self._img = np.full(n, -1, dtype=np.int64)
        self._pre = np.full(n, -1, dtype=np.int64)

    @classmethod
    def uniform(cls, n: int, rng: np.random.Generator,
                budget: int | None = None) -> "ExposureOracle":
        return cls(n, rng=rng, budget=budget)

    @classmethod
    def from_permutation(cls, perm, budget: int | None = None) -> "ExposureOracle":
        perm = np.asarray(perm, dtype=np.int64)
        return cls(len(perm), hidden=perm, budget=budget)

    # ---- queries ----

    @property
    def exposures(self) -> int:
        return len(self.log)

    def exposed_count(self) -> int:
        return len(self.log)

    def is_exposed(self, v: int, side: str) -> bool:
        if side == "F":
            return self._pre[v] != -1
        if side == "G":
            return self._img[v] != -1
        raise ValueError(f"side must be 'G' or 'F', got {side!r}")

    def image_if_exposed(self, u: int) -> int | None:
        v = int(self._img[u])
        return None if v == -1 else v

    def preimage_if_exposed(self, v: int) -> int | None:
        u = int(self._pre[v])
        return None if u == -1 else u

    def expose_image(self, u: int) -> int:
        v = int(self._img[u])
        if v != -1:
            return v
        self._charge()
        v = int(self._hidden[u])
        self._img[u] = v
        self._pre[v] = u
        self.log.append(ExposureRecord("img", u, v))
        return v

    def expose_preimage(self, v: int) -> int:
        u = int(self._pre[v])
        if u != -1:
            return u
        self._charge()
        u = int(self._hidden_inv[v])
        self._img[u] = v
        self._pre[v] = u
        self.log.append(ExposureRecord("pre", v, u))
        return u

    def _charge(self) -> None:
        if len(self.log) >= self.budget:
            raise BudgetExceeded(self.budget)

    # ---- derived views ----

    def exposed_pairs(self) -> list[tuple[int, int]]:
        """(source, target) pairs in exposure order."""
        out = []
        for rec in self.log:
            if rec.kind == "img":
                out.append((rec.query, rec.result))
            else:
                out.append((rec.result, rec.query))
        return out

    def image_edges(self, g: Graph) -> set[tuple[int, int]]:
        """Relabeled edges of g certified by the log: both endpoints exposed."""
        out = set()
        for u, w in g.edges():
            a = int(self._img[u])
            b = int(self._img[w])
            if a != -1 and b != -1:
                out.add((a, b) if a < b else (b, a))
        return out

    def full_map(self) -> np.ndarray:
        """The complete hidden bijection, for post-hoc diagnostics only."""
        return self._hidden.copy()
