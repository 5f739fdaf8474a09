"""Extension-closure rounds that eliminate short cycles from a cover.

A round opens one cycle into a path, grows a tree of endpoint rotations
from each open end, lengthens short candidate paths by absorbing a long
cycle, and finally closes the path back into a single long cycle through
one freshly exposed edge.  Every structure the round touches lives in the
union of the current cover and the relabeled auxiliary graph, so each
accepted round strictly shrinks the set of short cycles and never creates
a new one.

Rotations are recorded, not materialized: a tree node stores only its
parent and one RotationRecord, and the near-2-factor it denotes is rebuilt
by replaying the chain on demand.  That keeps tree memory at O(nodes)
instead of O(nodes * n) and lets the closing step re-check a recorded
sequence against a different starting path before committing to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .exposure import ExposureOracle
from .graphs import CycleCover, Graph, GraphError, NearTwoFactor, delete_edge

Edge = tuple[int, int]


class Phase1Failure(RuntimeError):
    """A short cycle could not be eliminated within the retry budget."""

    def __init__(self, message: str, stats: list["RoundStats"]):
        super().__init__(message)
        self.stats = stats


@dataclass(frozen=True)
class RotationRecord:
    """R(L; v, w, x): remove edge {w, x}, add edge {v, w}.

    v must be the moving endpoint of the path, {v, w} must not already be
    an edge, and x must be a current neighbor of w.  The new moving
    endpoint is always x.
    """

    v: int
    w: int
    x: int

    def inverse(self) -> "RotationRecord":
        return RotationRecord(self.x, self.w, self.v)


@dataclass(frozen=True)
class Phase1Params:
    """Tuning knobs for one extension-closure round.

    n0 is the short-cycle threshold in edges: rotations may never create a
    cycle shorter than n0, and a path that has reached n0 edges never
    shrinks below it.
    """

    n0: int
    t_max: int
    target_leaves: int
    reserved: frozenset[int] = frozenset()   # X: protected, must stay unexposed
    opposing: frozenset[int] = frozenset()   # X': endpoints claimed by the other tree
    leaf_margin: float = 1.2
    lengthen_min_keep: float = 0.08
    u_target_factor: float = 0.6
    close_probes: int = 3
    close_max_iters: int = 96
    round_attempts: int = 6
    retry_shrink: float = 0.72   # per-retry decay of the leaf target
    min_target: int = 8
    cycle_budget: int = 300     # exposures one short cycle may consume

    def __post_init__(self):
        if self.n0 < 3:
            raise ValueError("n0 must be at least 3")
        if self.t_max < 1 or self.target_leaves < 1:
            raise ValueError("t_max and target_leaves must be positive")

    @classmethod
    def for_n(cls, n: int, c0: float = 0.2, tau: float = 1.0,
              lam: float = 1.2, **overrides) -> "Phase1Params":
        """Scale-aware defaults: n0 ~ c0*n/ln n, t_max ~ tau*log4 n,
        target_leaves ~ lam*sqrt(n)."""
        if n < 8:
            raise ValueError("need n >= 8 for scaled parameters")
        ln = math.log(n)
        target = max(1, math.ceil(lam * math.sqrt(n)))
        base = dict(
            n0=max(3, math.ceil(c0 * n / ln)),
            t_max=max(1, math.ceil(tau * math.log(n, 4))),
            target_leaves=target,
            cycle_budget=math.ceil(4.5 * target) + 60,
        )
        base.update(overrides)
        return cls(**base)


# ---- materialized near-2-factor with explicit path order --------------------


class _State:
    """One near-2-factor, path order explicit, cycles as vertex arrays.

    path[0] is the anchored endpoint, path[-1] the moving one.  cycles maps
    an arbitrary stable key to the vertex order of one cycle component;
    ppos/cyc_id/cpos give O(1) classification of any vertex.
    """

    __slots__ = ("n", "path", "ppos", "cycles", "cyc_id", "cpos", "next_key")

    def __init__(self, n: int):
        self.n = n

    @classmethod
    def from_ntf(cls, ntf: NearTwoFactor, anchor: int) -> "_State":
        if anchor not in ntf.endpoints:
            raise GraphError("anchor must be a path endpoint")
        path, cyc = ntf.components()
        if path[0] != anchor:
            path = path[::-1]
        n = ntf.n
        st = cls(n)
        st.path = np.asarray(path, dtype=np.int32)
        st.ppos = np.full(n, -1, dtype=np.int32)
        st.ppos[st.path] = np.arange(len(path), dtype=np.int32)
        st.cycles = {}
        st.cyc_id = np.full(n, -1, dtype=np.int32)
        st.cpos = np.full(n, -1, dtype=np.int32)
        for key, order in enumerate(cyc):
            arr = np.asarray(order, dtype=np.int32)
            st.cycles[key] = arr
            st.cyc_id[arr] = key
            st.cpos[arr] = np.arange(len(arr), dtype=np.int32)
        st.next_key = len(cyc)
        return st

    def copy(self) -> "_State":
        st = _State(self.n)
        st.path = self.path.copy()
        st.ppos = self.ppos.copy()
        st.cycles = dict(self.cycles)  # component arrays are never mutated
        st.cyc_id = self.cyc_id.copy()
        st.cpos = self.cpos.copy()
        st.next_key = self.next_key
        return st

    def reversed(self) -> "_State":
        st = self.copy()
        st.path = st.path[::-1].copy()
        st.ppos[st.path] = np.arange(len(st.path), dtype=np.int32)
        return st

    @property
    def endpoint(self) -> int:
        return int(self.path[-1])

    @property
    def anchor(self) -> int:
        return int(self.path[0])

    def path_edges(self) -> int:
        return len(self.path) - 1

    def spanning(self) -> bool:
        return len(self.path) == self.n

    def cycle_of(self, v: int) -> np.ndarray | None:
        k = int(self.cyc_id[v])
        return None if k == -1 else self.cycles[k]

    # -- rotation classification and application --

    def probe(self, rec: RotationRecord) -> tuple[str, int, int]:
        """Classify rec against this state without mutating it.

        Returns (kind, new_path_vertices, shed_edges) where kind is one of
        "absorb", "reverse", "shed"; raises GraphError when rec is not a
        valid applicable rotation here.
        """
        v, w, x = rec.v, rec.w, rec.x
        plen = len(self.path)
        if v != self.path[-1]:
            raise GraphError(f"v={v} is not the moving endpoint")
        if w == v or x == v or w == x:
            raise GraphError("v, w, x must be three distinct vertices")
        if w == self.path[-2]:
            raise GraphError(f"edge ({v},{w}) already present")
        i = int(self.ppos[w])
        if i >= 0:
            if i + 1 < plen and self.path[i + 1] == x:
                return ("reverse", plen, 0)
            if i - 1 >= 0 and self.path[i - 1] == x:
                shed = plen - i
                if shed < 3 or i < 2:
                    raise GraphError("rotation would leave a degenerate component")
                return ("shed", i, shed)
            raise GraphError(f"x={x} is not a path neighbor of w={w}")
        arr = self.cycle_of(w)
        if arr is None:
            raise GraphError(f"w={w} not in the structure")
        m = len(arr)
        j = int(self.cpos[w])
        if arr[(j + 1) % m] != x and arr[j - 1] != x:
            raise GraphError(f"x={x} is not a cycle neighbor of w={w}")
        return ("absorb", plen + m, 0)

    def is_acceptable(self, rec: RotationRecord, n0: int) -> bool:
        """A rotation is acceptable when a path that already has n0 edges
        keeps at least n0 edges and any newly created cycle has at least
        n0 edges."""
        kind, new_pverts, shed = self.probe(rec)
        old_edges = self.path_edges()
        new_edges = new_pverts - 1
        if old_edges >= n0 and new_edges < n0:
            return False
        if kind == "shed" and shed < n0:
            return False
        return True

    def apply(self, rec: RotationRecord) -> None:
        kind, _, _ = self.probe(rec)
        w, x = rec.w, rec.x
        plen = len(self.path)
        if kind == "absorb":
            key = int(self.cyc_id[w])
            arr = self.cycles.pop(key)
            m = len(arr)
            j = int(self.cpos[w])
            if arr[(j + 1) % m] == x:
                seq = np.roll(arr, -(j + 1) % m)[::-1]  # w back toward x
            else:
                seq = np.roll(arr, -j)                  # w forward toward x
            self.path = np.concatenate([self.path, seq])
            self.ppos[seq] = np.arange(plen, plen + m, dtype=np.int32)
            self.cyc_id[seq] = -1
        elif kind == "reverse":
            i = int(self.ppos[w])
            self.path = np.concatenate([self.path[:i + 1], self.path[i + 1:][::-1]])
            self.ppos[self.path[i + 1:]] = np.arange(i + 1, plen, dtype=np.int32)
        else:  # shed
            i = int(self.ppos[w])
            shed = self.path[i:].copy()
            self.path = self.path[:i].copy()
            key = self.next_key
            self.next_key += 1
            self.cycles[key] = shed
            self.cyc_id[shed] = key
            self.cpos[shed] = np.arange(len(shed), dtype=np.int32)
            self.ppos[shed] = -1
        assert self.path[-1] == x, "rotation must move the endpoint to x"

    # -- exits --

    def to_ntf(self) -> NearTwoFactor:
        nxt = np.full(self.n, -1, dtype=np.int32)
        prv = np.full(self.n, -1, dtype=np.int32)
        p = self.path
        nxt[p[:-1]] = p[1:]
        prv[p[1:]] = p[:-1]
        for key in sorted(self.cycles):
            arr = self.cycles[key]
            nxt[arr] = np.roll(arr, -1)
            prv[arr] = np.roll(arr, 1)
        return NearTwoFactor(nxt=nxt, prv=prv,
                             endpoints=(int(p[0]), int(p[-1])))

    def close_into_cover(self) -> CycleCover:
        """Close the path with the edge {endpoint, anchor} and return the
        resulting cover; remaining cycle components carry over unchanged."""
        orders = [self.path] + [self.cycles[k] for k in sorted(self.cycles)]
        n = self.n
        succ = np.empty(n, dtype=np.int32)
        pred = np.empty(n, dtype=np.int32)
        cycle_id = np.empty(n, dtype=np.int32)
        cycles = []
        for cid, arr in enumerate(orders):
            arr = arr.astype(np.int32)
            succ[arr] = np.roll(arr, -1)
            pred[arr] = np.roll(arr, 1)
            cycle_id[arr] = cid
            cycles.append(arr)
        return CycleCover(succ=succ, pred=pred, cycle_id=cycle_id,
                          cycles=tuple(cycles))


# ---- public single-rotation operations ---------------------------------------


def rotate(L: NearTwoFactor, rec: RotationRecord) -> NearTwoFactor:
    """Apply one rotation to a near-2-factor and return the result.

    Raises GraphError when rec is not applicable to L.
    """
    a, b = L.endpoints
    if rec.v == a:
        anchor = b
    elif rec.v == b:
        anchor = a
    else:
        raise GraphError(f"v={rec.v} is not an endpoint of the path")
    st = _State.from_ntf(L, anchor)
    st.apply(rec)
    return st.to_ntf()


def is_acceptable(L: NearTwoFactor, rec: RotationRecord, params: Phase1Params) -> bool:
    """Check the no-new-short-cycle condition for one rotation on L."""
    a, b = L.endpoints
    anchor = b if rec.v == a else a
    return _State.from_ntf(L, anchor).is_acceptable(rec, params.n0)


# ---- endpoint exploration -----------------------------------------------------


@dataclass(frozen=True)
class TraverseResult:
    status: str  # "ok" | "empty" | "hard"
    candidates: tuple[RotationRecord, ...] = ()
    hit: int | None = None           # protected vertex that caused a hard failure
    pivots: tuple[int, ...] = ()


@dataclass
class TraversalBook:
    """Recall of past traversal probes, so nothing is ever paid for twice.

    pivots holds, per visited endpoint, the two images its own probe
    bound; they stay usable forever, even after the neighborhood fills up
    and a fresh probe of the same endpoint would be vetoed.  dead holds
    endpoints whose probe was vetoed; the veto only gets firmer as more
    is exposed, so these are never probed again.
    """

    pivots: dict[int, tuple[int, ...]] = field(default_factory=dict)
    dead: set[int] = field(default_factory=set)
    # cold: recalled endpoints whose candidates came back unusable; the
    # same recall stays unusable until the cover changes, so skip them
    # and clear the marks after any accepted round.
    cold: set[int] = field(default_factory=set)
    # dead_prime: endpoints where every absorption candidate is already
    # revealed and none works; deterministic until the cover changes.
    dead_prime: set[int] = field(default_factory=set)

    def root_cost(self, v: int, oracle: ExposureOracle, g23: Graph) -> int:
        """Price of rooting a traversal at v: 0 recalled or safe, 1 fresh
        gamble, 100 hopeless."""
        if v in self.dead or v in self.cold:
            return 100
        if v in self.pivots:
            return 0
        v_g = oracle.preimage_if_exposed(v)
        if v_g is None:
            return 1
        if any(oracle.is_exposed(h, "G") for h in g23.neighbors(v_g)):
            return 100
        return 0

    def prime_cost(self, v: int, oracle: ExposureOracle, g23: Graph) -> int:
        """Price of absorbing a long cycle at endpoint v: 0 when a revealed
        neighbor's image is on record, 1 when a fresh draw is possible,
        100 when every candidate is known to fail."""
        if v in self.dead_prime:
            return 100
        v_g = oracle.preimage_if_exposed(v)
        if v_g is None:
            return 1
        for h in g23.neighbors(v_g):
            if oracle.is_exposed(h, "G"):
                return 0
        return 1

    def clear_cover_marks(self) -> None:
        # marks below are only valid for one fixed cycle cover
        self.cold.clear()
        self.dead_prime.clear()


def preflight(v_tilde: int, oracle: ExposureOracle,
              protected: frozenset[int], g23: Graph) -> TraverseResult:
    """The exposure half of a traversal: preimage, freshness guard, pivots.

    Exposes the preimage of v_tilde; the move is abandoned (empty) if any
    auxiliary-graph neighbor of that preimage is already exposed, which
    keeps the remaining randomness conditionally uniform.  Otherwise
    exposes the images of the two lowest-index neighbors and returns them
    as pivots, or a hard failure when one lands on a protected vertex.

    The result stays adoptable after further exposures elsewhere: the
    pivots are bound, and only the derived endpoint candidates need to be
    recomputed against the then-current cover.
    """
    v_g = oracle.expose_preimage(v_tilde)
    nbrs = g23.neighbors(v_g)
    if len(nbrs) < 2 or any(oracle.is_exposed(h, "G") for h in nbrs):
        return TraverseResult("empty")
    pivots = (oracle.expose_image(nbrs[0]), oracle.expose_image(nbrs[1]))
    for w in pivots:
        if w in protected:
            return TraverseResult("hard", hit=w, pivots=pivots)
    return TraverseResult("ok", pivots=pivots)


def derive_candidates(v_tilde: int, pivots: tuple[int, ...], blocked: set[int],
                      oracle: ExposureOracle, protected: frozenset[int],
                      cover: CycleCover) -> TraverseResult:
    """The exposure-free half of a traversal: endpoint candidates from pivots."""
    for w in pivots:
        if w in protected:
            return TraverseResult("hard", hit=w, pivots=pivots)
    cands = []
    xs = []
    for w in pivots:
        for x in (int(cover.succ[w]), int(cover.pred[w])):
            cands.append(RotationRecord(v_tilde, w, x))
            xs.append(x)
    if len(set(xs)) != 4:
        return TraverseResult("empty", pivots=pivots)
    for x in xs:
        if x in blocked or x in protected or oracle.is_exposed(x, "F"):
            return TraverseResult("empty", pivots=pivots)
    return TraverseResult("ok", candidates=tuple(cands), pivots=pivots)


def traverse(v_tilde: int, blocked: set[int], oracle: ExposureOracle,
             protected: frozenset[int], g23: Graph,
             cover: CycleCover, book: TraversalBook | None = None) -> TraverseResult:
    """Expose the surroundings of one path endpoint and propose rotations.

    Returns four candidate rotations (two cover-neighbors x per pivot w),
    an empty result when the neighborhood is unusable, or a hard failure
    when a pivot lands on a protected vertex.  With a book, an endpoint
    visited before recalls its bound pivots instead of probing again, and
    a vetoed endpoint is refused outright.
    """
    if book is not None:
        prior = book.pivots.get(v_tilde)
        if prior is not None:
            res = derive_candidates(v_tilde, prior, blocked, oracle,
                                    protected, cover)
            if res.status != "ok":
                book.cold.add(v_tilde)
            return res
        if v_tilde in book.dead:
            return TraverseResult("empty")
    res = preflight(v_tilde, oracle, protected, g23)
    if book is not None:
        if res.pivots:
            book.pivots[v_tilde] = res.pivots
        elif res.status == "empty":
            book.dead.add(v_tilde)
    if res.status != "ok":
        return res
    out = derive_candidates(v_tilde, res.pivots, blocked, oracle, protected,
                            cover)
    if book is not None and out.status != "ok":
        book.cold.add(v_tilde)
    return out


@dataclass
class TreeNode:
    parent: int
    record: RotationRecord | None
    endpoint: int
    depth: int
    path_len: int           # vertices on the path at this node
    expanded: bool = False
    dead: bool = False


@dataclass
class GrowResult:
    """An exploration tree plus the usable leaves it produced."""

    success: bool
    nodes: list[TreeNode]
    leaves: list[int]                  # indices into nodes
    root_state: _State
    cover: CycleCover
    blocked: set[int]
    exposures: int
    rotations: int
    hard_failure: bool = False
    hard_hit: int | None = None

    def records_to(self, idx: int) -> list[RotationRecord]:
        chain: list[RotationRecord] = []
        while idx != 0:
            node = self.nodes[idx]
            chain.append(node.record)  # type: ignore[arg-type]
            idx = node.parent
        chain.reverse()
        return chain

    def materialize(self, idx: int) -> _State:
        st = self.root_state.copy()
        for rec in self.records_to(idx):
            st.apply(rec)
        return st

    def leaf_endpoints(self) -> list[int]:
        return [self.nodes[i].endpoint for i in self.leaves]

    def spanning_leaves(self) -> list[int]:
        n = self.root_state.n
        return [i for i in self.leaves if self.nodes[i].path_len == n]


def grow_paths(L: NearTwoFactor, fixed_end: int, free_end: int,
               params: Phase1Params, oracle: ExposureOracle, g23: Graph,
               cover: CycleCover | None = None,
               blocked: Iterable[int] = (),
               root_traverse: TraverseResult | None = None,
               book: TraversalBook | None = None,
               base_state: "_State | None" = None) -> GrowResult:
    """Grow a rotation tree from free_end, keeping fixed_end anchored.

    Levels are expanded on demand: within a level, nodes with the longest
    paths go first, and expansion stops as soon as the live unexposed
    frontier exceeds the leaf target with some slack.  A node is expanded
    only if all four of its candidate rotations are applicable and
    acceptable; otherwise it is pruned.

    root_traverse, when given, is a previously computed traversal of
    free_end; the root then spends no exposures of its own, and its
    candidates are re-derived from the recorded pivots so that anything
    exposed in the meantime is filtered out.
    """
    if cover is None:
        cover = L.restore_edge()
    if base_state is None:
        root_state = _State.from_ntf(L, anchor=fixed_end)
    else:
        root_state = base_state.copy()
    if root_state.endpoint != free_end:
        raise GraphError("free_end is not the moving endpoint")
    start_exposures = oracle.exposures
    n0 = params.n0
    blocked_set = set(blocked) | {fixed_end, free_end}
    nodes = [TreeNode(-1, None, free_end, 0, len(root_state.path))]
    need = max(params.target_leaves,
               math.ceil(params.leaf_margin * params.target_leaves))

    def usable(i: int) -> bool:
        nd = nodes[i]
        return (i != 0 and not nd.expanded and not nd.dead
                and not oracle.is_exposed(nd.endpoint, "F")
                and nd.endpoint not in params.reserved
                and nd.endpoint not in params.opposing)

    def result(success: bool, hard: bool = False, hit: int | None = None) -> GrowResult:
        leaves = [i for i in range(len(nodes)) if usable(i)]
        rotations = sum(1 for nd in nodes if nd.record is not None)
        return GrowResult(success=success, nodes=nodes, leaves=leaves,
                          root_state=root_state, cover=cover,
                          blocked=blocked_set,
                          exposures=oracle.exposures - start_exposures,
                          rotations=rotations,
                          hard_failure=hard, hard_hit=hit)

    # `live` tracks the usable frontier incrementally; collateral exposures
    # can make it drift high, so each level starts with an exact recount
    # and the final success check refilters.
    frontier = [0]
    live = 0
    for depth in range(1, params.t_max + 1):
        live = sum(usable(i) for i in range(len(nodes)))
        if live >= need:
            break
        if depth >= 3 and live < max(2, need // 20):
            break  # the tree is dying; stop feeding it exposures
        next_frontier: list[int] = []
        for p in sorted(frontier, key=lambda i: (-nodes[i].path_len, i)):
            if live >= need:
                break
            node = nodes[p]
            if p != 0 and oracle.is_exposed(node.endpoint, "F"):
                node.dead = True  # collaterally exposed while waiting
                live -= 1
                continue
            if p == 0 and root_traverse is not None:
                res = derive_candidates(node.endpoint, root_traverse.pivots,
                                        blocked_set, oracle, params.reserved,
                                        cover)
            else:
                res = traverse(node.endpoint, blocked_set, oracle,
                               params.reserved, g23, cover, book)
            if res.status == "hard":
                return result(False, hard=True, hit=res.hit)
            if res.status == "empty":
                node.dead = True
                if p == 0 and book is not None:
                    book.cold.add(node.endpoint)
                if p != 0:
                    live -= 1
                continue
            st = grow_result_replay(root_state, nodes, p)
            admit = []
            ok = True
            for rec in res.candidates:
                try:
                    kind, new_pverts, shed = st.probe(rec)
                except GraphError:
                    ok = False
                    break
                old_edges = len(st.path) - 1
                if (old_edges >= n0 and new_pverts - 1 < n0) or (shed and shed < n0):
                    ok = False
                    break
                admit.append((rec, new_pverts))
            if not ok:
                node.dead = True
                # A root's candidates replay identically next time, so a
                # rejected root is cold until the cover changes.
                if p == 0 and book is not None:
                    book.cold.add(node.endpoint)
                if p != 0:
                    live -= 1
                continue
            node.expanded = True
            if p != 0:
                live -= 1
            for rec, new_pverts in admit:
                nodes.append(TreeNode(p, rec, rec.x, depth, new_pverts))
                next_frontier.append(len(nodes) - 1)
                blocked_set.add(rec.x)
                live += 1
        frontier = next_frontier
        if not frontier:
            break
    return result(sum(usable(i) for i in range(len(nodes))) >= params.target_leaves)


def grow_result_replay(root_state: _State, nodes: list[TreeNode], idx: int) -> _State:
    chain: list[RotationRecord] = []
    while idx != 0:
        chain.append(nodes[idx].record)  # type: ignore[arg-type]
        idx = nodes[idx].parent
    st = root_state.copy()
    for rec in reversed(chain):
        st.apply(rec)
    return st


def lengthen_paths(grown: GrowResult, params: Phase1Params,
                   oracle: ExposureOracle, g23: Graph) -> GrowResult:
    """Absorb one long cycle into every leaf whose path is still short.

    Long leaves pass through untouched and cost nothing.  A short leaf
    spends one preimage and one image exposure; it is dropped unless the
    exposed pivot sits on a cycle of at least n0 edges with a usable
    unexposed neighbor.  Success requires keeping a configured fraction
    of the leaf target.  Exposing a reserved vertex is a hard failure.
    """
    start_exposures = oracle.exposures
    n0 = params.n0
    cover = grown.cover
    nodes = grown.nodes
    kept: list[int] = []
    rotations = 0
    for i in list(grown.leaves):
        node = nodes[i]
        e = node.endpoint
        if oracle.is_exposed(e, "F"):
            continue
        if node.path_len - 1 >= n0:
            kept.append(i)
            continue
        v_g = oracle.expose_preimage(e)
        free = [h for h in g23.neighbors(v_g) if not oracle.is_exposed(h, "G")]
        if not free:
            continue
        w = oracle.expose_image(free[0])
        if w in params.reserved:
            return GrowResult(
                success=False, nodes=nodes, leaves=kept,
                root_state=grown.root_state, cover=cover,
                blocked=grown.blocked,
                exposures=grown.exposures + (oracle.exposures - start_exposures),
                rotations=grown.rotations + rotations,
                hard_failure=True, hard_hit=w)
        st = grown.materialize(i)
        arr = st.cycle_of(w)
        if arr is None or len(arr) < n0:
            continue
        chosen = None
        for x in (int(cover.succ[w]), int(cover.pred[w])):
            if x in grown.blocked or x in params.reserved or x in params.opposing:
                continue
            if oracle.is_exposed(x, "F"):
                continue
            rec = RotationRecord(e, w, x)
            try:
                st.probe(rec)
            except GraphError:
                continue  # cycle order differs from the cover here
            chosen = rec
            break
        if chosen is None:
            continue
        nodes.append(TreeNode(i, chosen, chosen.x, node.depth + 1,
                              node.path_len + len(arr)))
        grown.blocked.add(chosen.x)
        kept.append(len(nodes) - 1)
        rotations += 1
    min_keep = max(1, math.ceil(params.lengthen_min_keep * params.target_leaves))
    return GrowResult(success=len(kept) >= min_keep, nodes=nodes, leaves=kept,
                      root_state=grown.root_state, cover=cover,
                      blocked=grown.blocked,
                      exposures=grown.exposures + (oracle.exposures - start_exposures),
                      rotations=grown.rotations + rotations,
                      hard_failure=False)


def advance_endpoint(st: _State, oracle: ExposureOracle, g23: Graph,
                     cover: CycleCover, params: Phase1Params,
                     blocked: Iterable[int] = (),
                     book: TraversalBook | None = None,
                     ) -> tuple[str, RotationRecord | None]:
    """Move the endpoint of st onto a fresh vertex with one rotation.

    While the path is short the rotation must absorb a cycle of at least
    n0 edges; once the path is long, a reversal whose pivot sits on the
    path works just as well.  Neighbors whose images are already on
    record are consulted first at no cost; after that, the images of up
    to two unexposed neighbors are drawn.  Applies the rotation in place
    on success ("ok"); "soft" when no usable candidate turns up, "hard"
    when a draw lands on a reserved vertex.
    """
    e = st.endpoint
    if book is not None and e in book.dead_prime:
        return "soft", None
    v_g = oracle.expose_preimage(e)
    avoid = set(blocked)
    long_path = st.path_edges() >= params.n0

    def try_w(w: int) -> RotationRecord | None:
        arr = st.cycle_of(w)
        if arr is None:
            if not long_path:
                return None
        elif len(arr) < params.n0:
            return None
        for x in (int(cover.succ[w]), int(cover.pred[w])):
            if (x in avoid or x in params.reserved or x in params.opposing
                    or oracle.is_exposed(x, "F")):
                continue
            rec = RotationRecord(e, w, x)
            try:
                if st.probe(rec)[0] == "shed":
                    continue
            except GraphError:
                continue
            st.apply(rec)
            return rec
        return None

    fresh: list[int] = []
    for h in g23.neighbors(v_g):
        w = oracle.image_if_exposed(h)
        if w is None:
            fresh.append(h)
            continue
        rec = try_w(w)
        if rec is not None:
            return "ok", rec
    for h in fresh[:2]:
        w = oracle.expose_image(h)
        if w in params.reserved:
            return "hard", None
        rec = try_w(w)
        if rec is not None:
            return "ok", rec
    if book is not None and len(fresh) <= 2:
        # every candidate is now revealed and none worked
        book.dead_prime.add(e)
    return "soft", None


class ReservedHit(RuntimeError):
    """A probe exposed a vertex that a pending round still reserves."""

    def __init__(self, hit: int):
        super().__init__(f"probe exposed reserved vertex {hit}")
        self.hit = hit


def close_cycle(x_ends: Sequence[int], y_map: Mapping[int, Iterable[int]],
                oracle: ExposureOracle, g23: Graph, params: Phase1Params,
                validator: Callable[[int, int], object] | None = None
                ) -> tuple[int, int] | None:
    """Search for one edge joining an x-endpoint to a partner in Y_x.

    Pairs already on the record are consulted first: an edge whose
    endpoints are both revealed is checked against Y_x at no exposure
    cost.  The paid loop then visits x-endpoints in the given order,
    exposing the preimage of x, re-checking its revealed neighbors, and
    drawing the images of up to close_probes unexposed neighbors per
    visit; later passes revisit endpoints whose neighbors are not yet
    exhausted.  Only an unexposed partner can be hit by a draw, so a
    visit whose partners are all revealed skips the draws.  A candidate
    hit (x, y) is accepted only if `validator` (when given) confirms it.
    Returns the joining endpoints, or None once every neighborhood is
    exhausted or the probe budget runs out.  Raises ReservedHit when a
    draw lands on a reserved vertex.
    """
    y_sets = {x: frozenset(ys) for x, ys in y_map.items()}
    bad: set[tuple[int, int]] = set()

    def accept(x: int, z: int) -> bool:
        if (x, z) in bad:
            return False
        if validator is None or validator(x, z) is not None:
            return True
        bad.add((x, z))
        return False

    def certified(x: int, x_g: int) -> int | None:
        targets = y_sets.get(x)
        if not targets:
            return None
        for h in g23.neighbors(x_g):
            z = oracle.image_if_exposed(h)
            if z is not None and z in targets and accept(x, z):
                return z
        return None

    for x in x_ends:
        x_g = oracle.preimage_if_exposed(x)
        if x_g is not None:
            z = certified(x, x_g)
            if z is not None:
                return (x, z)

    fresh = 0
    alive = list(x_ends)
    while alive and fresh < params.close_max_iters:
        progressed = False
        next_alive: list[int] = []
        for x in alive:
            if fresh >= params.close_max_iters:
                next_alive.append(x)
                continue
            targets = y_sets.get(x, frozenset())
            if not targets:
                continue
            drawable = any(not oracle.is_exposed(y, "F") for y in targets)
            was_exposed = oracle.is_exposed(x, "F")
            if was_exposed and not drawable:
                continue
            x_g = oracle.expose_preimage(x)
            if not was_exposed:
                fresh += 1
                progressed = True
            z = certified(x, x_g)  # revealed pairs may already close this
            if z is not None:
                return (x, z)
            if not drawable:
                continue
            free = [h for h in g23.neighbors(x_g) if not oracle.is_exposed(h, "G")]
            if not free:
                continue
            for h in free[:params.close_probes]:
                z = oracle.expose_image(h)
                fresh += 1
                progressed = True
                if z in params.reserved:
                    raise ReservedHit(z)
                if z in targets and accept(x, z):
                    return (x, z)
                if fresh >= params.close_max_iters:
                    break
            if len(free) > params.close_probes:
                next_alive.append(x)  # revisit with the remaining neighbors
        if not progressed:
            break
        alive = next_alive
    return None


# ---- one full round and the elimination driver -------------------------------


@dataclass
class RoundStats:
    target_edges: int
    outcome: str                 # "closed" | "soft" | "hard" | "blocked"
    stage: str = ""              # where the attempt ended
    exposures: int = 0
    rotations: int = 0
    tree1_leaves: int = 0
    kept_leaves: int = 0
    tree2_leaves: int = 0
    small_before: int = 0
    small_after: int = 0
    closing_edge: Edge | None = None

    def as_dict(self) -> dict:
        return {
            "target_edges": self.target_edges,
            "outcome": self.outcome,
            "stage": self.stage,
            "exposures": self.exposures,
            "rotations": self.rotations,
            "tree1_leaves": self.tree1_leaves,
            "kept_leaves": self.kept_leaves,
            "tree2_leaves": self.tree2_leaves,
            "small_before": self.small_before,
            "small_after": self.small_after,
            "closing_edge": list(self.closing_edge) if self.closing_edge else None,
        }


def _small_cycle_sets(cover: CycleCover, n0: int) -> set[frozenset[int]]:
    return {frozenset(cover.cycles[i].tolist())
            for i in cover.small_cycles(n0)}


def _attempt_round(cover: CycleCover, edge: Edge, anchor: int, free: int,
                   xset: frozenset[int], params: Phase1Params,
                   oracle: ExposureOracle, g23: Graph, mode: str,
                   stats: RoundStats,
                   book: TraversalBook | None = None) -> CycleCover | None:
    """One deletion-to-closure attempt.  mode selects the closing filter:
    "long" accepts any closure, "spanning" only a spanning path,
    "reduce" any closure that strictly reduces the cycle count.
    """
    start_exposures = oracle.exposures
    n = cover.n
    n0 = params.n0
    k_before = cover.k
    L0 = delete_edge(cover, edge)
    rotations = 0
    try:
        # The u-side tree hinges on a single traversal of the anchor, so
        # resolve that probe first, while as little as possible is exposed;
        # the u-side tree itself still grows after the lengthening step.
        stats.stage = "probe"
        pre2 = traverse(anchor, {anchor, free}, oracle,
                        xset - {anchor, free}, g23, cover, book)
        if pre2.status == "hard":
            stats.outcome = "hard"
            return None
        if pre2.status == "empty":
            stats.outcome = "soft"
            return None
        pre2_xs = frozenset(rec.x for rec in pre2.candidates)

        # Prime the base path: absorb one long cycle up front, so both
        # trees grow on a path that is already long.  Their chains are
        # then mostly reversals, and endpoint pairs drawn from the two
        # trees stay mutually applicable at closing time.
        base = _State.from_ntf(L0, anchor=anchor)
        start = free
        primed = 0

        def tree2_viable() -> bool:
            # the second tree replays the probe candidates onto the
            # reversed base, all four or nothing
            rb = base.reversed()
            for rec in pre2.candidates:
                try:
                    if not rb.is_acceptable(rec, n0):
                        return False
                except GraphError:
                    return False
            return True

        def roll_base(cap: int, force: bool) -> str:
            """Advance the endpoint until the reversed base admits the
            probe candidates; force rolls at least once."""
            nonlocal primed, start
            need_roll = force
            while True:
                if not need_roll and tree2_viable():
                    return "ok"
                if primed >= cap:
                    return "soft"
                stats.stage = "prime"
                status, _ = advance_endpoint(base, oracle, g23, cover,
                                             params, book=book,
                                             blocked=pre2_xs | {anchor, free})
                if status != "ok":
                    return status
                primed += 1
                start = base.endpoint
                need_roll = False

        if base.path_edges() < n0:
            stats.stage = "prime"
            status, _rec = advance_endpoint(base, oracle, g23, cover, params,
                                            blocked=pre2_xs | {anchor, free},
                                            book=book)
            if status != "ok":
                stats.outcome = "hard" if status == "hard" else "soft"
                return None
            primed = 1
            start = base.endpoint
        status = roll_base(4, force=False)
        if status != "ok":
            stats.outcome = "hard" if status == "hard" else "soft"
            return None

        stats.stage = "tree1"
        p1 = replace(params, reserved=(xset | {anchor}) - {free},
                     opposing=frozenset())
        while True:
            g1 = grow_paths(L0, anchor, start, p1, oracle, g23, cover=cover,
                            blocked=pre2_xs, book=book, base_state=base)
            rotations = primed + g1.rotations
            if g1.hard_failure:
                stats.outcome = "hard"
                return None
            if g1.success or len(g1.nodes) > 1 or primed >= 6:
                break
            # The root was vetoed before anything grew.  Advancing the
            # endpoint once more rolls a new root instead of throwing the
            # whole round away.
            status = roll_base(6, force=True)
            if status != "ok":
                stats.outcome = "hard" if status == "hard" else "soft"
                return None
            stats.stage = "tree1"
        stats.tree1_leaves = len(g1.leaves)
        if not g1.success:
            stats.outcome = "soft"
            return None
        stats.stage = "lengthen"
        l1 = lengthen_paths(g1, p1, oracle, g23)
        stats.kept_leaves = len(l1.leaves)
        rotations = primed + l1.rotations
        if l1.hard_failure:
            stats.outcome = "hard"
            return None
        if not l1.success:
            stats.outcome = "soft"
            return None

        # Partner pool: every recorded state whose path is already long.
        # A state with a revealed endpoint pair can be reached through a
        # certified edge; an unexposed leaf can be hit by a fresh draw.
        stats.stage = "partners"
        y_known: list[int] = []
        y_fresh: list[int] = []
        usable = set(l1.leaves)
        for i, nd in enumerate(l1.nodes):
            if nd.path_len - 1 < n0:
                continue
            if oracle.is_exposed(nd.endpoint, "F"):
                y_known.append(i)
            elif i in usable or i == 0:
                # the root state is the second tree's own base, so any
                # closing pair using it replays without conflict
                y_fresh.append(i)
        if mode == "spanning":
            y_known = [i for i in y_known if l1.nodes[i].path_len == n]
            y_fresh = [i for i in y_fresh if l1.nodes[i].path_len == n]
        elif mode == "long":
            span = [i for i in y_fresh if l1.nodes[i].path_len == n]
            if len(span) >= max(1, len(y_fresh) // 2):
                # most partners already span everything: commit to a
                # spanning closure and save follow-up consolidation work
                y_fresh = span
                y_known = [i for i in y_known if l1.nodes[i].path_len == n]
        if not (y_known or y_fresh):
            stats.outcome = "soft"
            return None

        def state_ok(st: _State) -> bool:
            if st.path_edges() < n0:
                return False
            if mode == "spanning" and not st.spanning():
                return False
            if mode == "reduce" and len(st.cycles) + 1 >= k_before:
                return False
            return True

        # A revealed partner adjacent to the anchor closes the path on the
        # spot, without growing the second tree at all.
        anchor_nbrs = set(g23.neighbors(oracle.expose_preimage(anchor)))
        for i in sorted(y_known, key=lambda i: -l1.nodes[i].path_len):
            e = l1.nodes[i].endpoint
            if oracle.preimage_if_exposed(e) not in anchor_nbrs:
                continue
            st = l1.materialize(i)
            if not state_ok(st):
                continue
            stats.outcome = "closed"
            stats.closing_edge = (min(e, anchor), max(e, anchor))
            return st.close_into_cover()

        stats.stage = "tree2"
        t2_target = max(1, math.ceil(params.u_target_factor * params.target_leaves))
        p2 = replace(params, reserved=xset - {anchor, free},
                     opposing=frozenset(l1.nodes[i].endpoint for i in l1.leaves),
                     target_leaves=t2_target)
        g2 = grow_paths(L0, start, anchor, p2, oracle, g23, cover=cover,
                        blocked=p2.opposing, root_traverse=pre2, book=book,
                        base_state=base.reversed())
        stats.tree2_leaves = len(g2.leaves)
        rotations += g2.rotations
        if g2.hard_failure:
            stats.outcome = "hard"
            return None
        if not g2.success:
            stats.outcome = "soft"
            return None

        # Every second-tree state is a closing candidate, not just the
        # frontier: interior endpoints were revealed when they expanded,
        # so checking them against revealed partners costs nothing.
        y_pool = y_known + y_fresh
        y_by_end = {l1.nodes[i].endpoint: i for i in y_pool}
        targets = tuple(sorted(y_by_end,
                               key=lambda e: -l1.nodes[y_by_end[e]].path_len))
        x_pool = list(range(1, len(g2.nodes)))
        x_order = sorted(x_pool, key=lambda i: (
            0 if oracle.is_exposed(g2.nodes[i].endpoint, "F") else 1,
            -g2.nodes[i].path_len, g2.nodes[i].endpoint))
        x_ends = [g2.nodes[i].endpoint for i in x_order]
        x_by_end = {g2.nodes[i].endpoint: i for i in x_order}
        y_map = {x: targets for x in x_ends}

        stats.stage = "close"
        closed: dict[tuple[int, int], _State] = {}

        def validator(x: int, z: int):
            cand = l1.materialize(y_by_end[z]).reversed()  # endpoint -> anchor side
            for rec in g2.records_to(x_by_end[x]):
                try:
                    if not cand.is_acceptable(rec, n0):
                        return None
                    cand.apply(rec)
                except GraphError:
                    return None
            if not state_ok(cand):
                return None
            closed[(x, z)] = cand
            return cand

        try:
            hit = close_cycle(x_ends, y_map, oracle, g23, p2, validator)
        except ReservedHit:
            stats.outcome = "hard"
            return None
        if hit is None:
            stats.outcome = "soft"
            return None
        final = closed[hit]
        stats.outcome = "closed"
        stats.stage = "done"
        stats.closing_edge = (min(hit), max(hit))
        return final.close_into_cover()
    finally:
        stats.exposures = oracle.exposures - start_exposures
        stats.rotations = rotations


def consolidation_round(cover: CycleCover, oracle: ExposureOracle, g23: Graph,
                        params: Phase1Params, mode: str = "spanning",
                        book: TraversalBook | None = None
                        ) -> tuple[CycleCover | None, RoundStats]:
    """One merge round on an all-long cover.

    Opens the smallest cycle and runs the usual two-tree closure with no
    protected vertices.  mode "spanning" insists the closing path covers
    everything (so the result is a single cycle); mode "reduce" accepts
    any closure that strictly lowers the cycle count.
    """
    if book is None:
        book = TraversalBook()

    def pick_edge(skip: set[Edge]):
        order = sorted(range(cover.k), key=lambda c: (len(cover.cycles[c]), c))
        edge = None
        best = 100
        for cid in order:
            arr = cover.cycles[cid]
            for i in range(len(arr)):
                u, v = int(arr[i]), int(arr[(i + 1) % len(arr)])
                if (u, v) in skip:
                    continue
                c = (book.root_cost(u, oracle, g23)
                     + book.root_cost(v, oracle, g23))
                if c < best:
                    edge, best = (u, v), c
                    if best == 0:
                        break
            if edge is not None:
                break  # stay on the smallest cycle once it has a live edge
        return edge

    # A death at the probe or priming stage is a one-exposure lottery, so
    # try several edges before reporting a miss; only a full grown-and-
    # failed attempt ends the round.
    skip: set[Edge] = set()
    stats = RoundStats(target_edges=0, outcome="blocked")
    for _ in range(8):
        edge = pick_edge(skip)
        if edge is None:
            break
        skip.add(edge)
        stats = RoundStats(
            target_edges=len(cover.cycles[cover.cycle_id[edge[0]]]),
            outcome="blocked")
        if (book.root_cost(edge[0], oracle, g23)
                >= book.root_cost(edge[1], oracle, g23)):
            anchor, free = edge
        else:
            free, anchor = edge
        new_cover = _attempt_round(cover, edge, anchor, free, frozenset(),
                                   params, oracle, g23, mode, stats, book)
        if new_cover is not None:
            book.clear_cover_marks()
            return new_cover, stats
        if stats.stage not in ("probe", "prime"):
            break
    return None, stats


def merge_long_cycles(cover: CycleCover, oracle: ExposureOracle, g23: Graph,
                      params: Phase1Params,
                      book: TraversalBook | None = None,
                      max_rounds: int = 24
                      ) -> tuple[CycleCover, list[RoundStats]]:
    """Merge an all-long cover into a single cycle.

    Each round first tries a spanning closure, which finishes the job in
    one stroke, and falls back to any closure that strictly reduces the
    cycle count.  The leaf target shrinks with the exposed fraction and
    with consecutive misses.  Stops early when no usable edge is left;
    callers check cover.k on the result.
    """
    if book is None:
        book = TraversalBook()
    history: list[RoundStats] = []
    misses = 0
    while cover.k > 1 and len(history) < max_rounds:
        wf = (1.0 - oracle.exposures / cover.n) ** 3
        t = max(params.min_target,
                math.ceil(params.target_leaves * wf
                          * params.retry_shrink ** misses))
        p = replace(params, target_leaves=t)
        new, st = consolidation_round(cover, oracle, g23, p, "spanning", book)
        history.append(st)
        if new is None and st.outcome != "blocked":
            new, st = consolidation_round(cover, oracle, g23, p, "reduce", book)
            history.append(st)
        if new is not None:
            cover = new
            misses = 0
        elif st.outcome == "blocked":
            break
        else:
            misses += 1
    return cover, history


def _reserve_edges(cover: CycleCover, n0: int) -> dict[frozenset[int], list[Edge]]:
    """One edge per triangle, two disjoint edges per longer short cycle."""
    out: dict[frozenset[int], list[Edge]] = {}
    for cid in sorted(cover.small_cycles(n0)):
        arr = cover.cycles[cid]
        edges = [(int(arr[0]), int(arr[1]))]
        if len(arr) >= 4:
            edges.append((int(arr[2]), int(arr[3])))
        out[frozenset(arr.tolist())] = edges
    return out


def eliminate_short_cycles(f: CycleCover, g23: Graph, oracle: ExposureOracle,
                           params: Phase1Params,
                           book: TraversalBook | None = None
                           ) -> tuple[CycleCover, list[RoundStats]]:
    """Run extension-closure rounds until every cycle has >= n0 edges.

    Each accepted round strictly shrinks the set of short cycles and never
    introduces a new one; both facts are asserted on every round.  Raises
    Phase1Failure when some short cycle survives its retry budget.
    """
    n0 = params.n0
    cover = f
    reserved = _reserve_edges(cover, n0)
    history: list[RoundStats] = []

    if book is None:
        book = TraversalBook()
    stuck: set[frozenset[int]] = set()
    spent: dict[frozenset[int], int] = {}
    tried: dict[Edge, int] = {}
    visits: dict[frozenset[int], int] = {}
    while True:
        smalls = sorted(cover.small_cycles(n0),
                        key=lambda c: (len(cover.cycles[c]), c))
        if not smalls:
            return cover, history
        keys = {c: frozenset(cover.cycles[c].tolist()) for c in smalls}
        pending = [c for c in smalls if keys[c] not in stuck]
        if not pending:
            raise Phase1Failure(
                f"{len(smalls)} short cycle(s) out of usable edges", history)
        # Visit the least-worked cycle next: every target gets its early
        # attempts while little is exposed, instead of one cycle burning
        # its whole edge pool as the exposed fraction climbs.
        target = min(pending,
                     key=lambda c: (visits.get(keys[c], 0),
                                    len(cover.cycles[c]), c))
        key = keys[target]
        visits[key] = visits.get(key, 0) + 1
        arr = cover.cycles[target]
        xset = frozenset(v for edges in reserved.values() for e in edges for v in e)

        def orient(e: Edge) -> tuple[int, Edge]:
            # the fixed end pays traversal cost, the moving end pays
            # absorption cost; pick the cheaper assignment
            c01 = (book.root_cost(e[0], oracle, g23)
                   + book.prime_cost(e[1], oracle, g23))
            c10 = (book.root_cost(e[1], oracle, g23)
                   + book.prime_cost(e[0], oracle, g23))
            if c01 <= c10:
                return c01, e
            return c10, (e[1], e[0])

        def cost(e: Edge) -> int:
            return orient(e)[0]

        pool = list(reserved.get(key, []))
        pool += [e for e in ((int(arr[i]), int(arr[(i + 1) % len(arr)]))
                             for i in range(len(arr))) if e not in pool]

        before = _small_cycle_sets(cover, n0)
        done = None
        # The budget is denominated in exposures, so a one-exposure veto
        # is a cheap re-roll while a full grown-and-failed round weighs
        # what it cost; edges rotate via their usage counts.  A death at
        # the probe or priming stage never reached the trees, so it only
        # consumes budget, not one of the visit's full attempts.
        attempts = 0
        rolls = 0
        while attempts < 2 and rolls < 12:
            used = spent.get(key, 0)
            if used >= params.cycle_budget:
                stuck.add(key)
                break
            ranked = sorted(pool, key=lambda e: (cost(e), tried.get(e, 0), e))
            if not ranked or cost(ranked[0]) >= 100:
                stuck.add(key)
                break
            edge = ranked[0]
            tried[edge] = tried.get(edge, 0) + 1
            anchor, free = orient(edge)[1]
            # Retries run leaner: a shrunken tree is cheap, still closable
            # through certified edges, and less likely to clip a reserved
            # vertex while it grows.  The target also tracks how much is
            # already exposed, since leaf survival decays with coverage.
            shrink = params.retry_shrink ** (used // 45)
            wf = (1.0 - oracle.exposures / cover.n) ** 3
            p = replace(params, target_leaves=max(
                params.min_target,
                math.ceil(params.target_leaves * shrink * wf)))
            stats = RoundStats(target_edges=len(arr), outcome="",
                               small_before=len(before))
            new_cover = _attempt_round(cover, edge, anchor, free, xset,
                                       p, oracle, g23, "long", stats, book)
            history.append(stats)
            spent[key] = used + max(2, stats.exposures)
            if new_cover is not None:
                done = new_cover
                break
            if stats.stage in ("probe", "prime"):
                rolls += 1
            else:
                attempts += 1
        if done is None:
            # Move on; another target's round can still absorb this cycle
            # as a side effect, and any success frees the stuck marks.
            continue

        done.validate()
        after = _small_cycle_sets(done, n0)
        assert not (after - before), "a round must never create a short cycle"
        assert after < before, "short-cycle set must strictly shrink"
        history[-1].small_after = len(after)
        cover = done
        reserved = {k: v for k, v in reserved.items() if k in after}
        stuck.clear()
        book.clear_cover_marks()  # recalls may derive fresh candidates now
