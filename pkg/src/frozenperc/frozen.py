"""Volume-frozen percolation dynamics.

Vertices activate in increasing order of their activation times; an
activation is allowed unless some adjacent black cluster is frozen, and
a merged cluster freezes the instant its volume reaches the threshold N.
Runs are deterministic functions of (seed, domain, N).

Besides the event-driven lattice run, this module has a permutation
oracle (recomputes clusters from scratch at every step; no shared code
with the fast path) and an exact brute-force enumeration over all
activation orders for small graphs.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import permutations

import numpy as np
from scipy import ndimage

from . import _kernels as K
from .lattice import Domain, TRI_STRUCTURE, inner_boundary
from .rng import tau_matrix


@dataclass
class FreezeEvent:
    """One freezing: its time, the cluster, and what it did around the origin."""

    time: float
    cluster_volume: int
    surrounds_origin: bool
    hole_volume_after: int | None
    root: int
    origin_on_cluster: bool = False


@dataclass
class FreezeTrace:
    events: list
    final_origin_volume: int
    final_origin_frozen: bool
    any_frozen_touches_edge: bool
    forest: "FrozenForest | None" = None

    @property
    def origin_frozen_at_one(self) -> bool:
        return self.final_origin_frozen

    def fill_hole_volumes(self, origin=(0, 0)):
        """Compute the hole volume left after each event (lazy: needs one
        labeling pass per event)."""
        if self.forest is None:
            raise ValueError("trace is detached from its forest")
        domain = self.forest.domain
        ox, oy = origin
        if (ox, oy) not in domain:
            for e in self.events:
                e.hole_volume_after = 0
            return self
        oi, oj = oy - domain.y0, ox - domain.x0
        cumulative = np.zeros(self.forest.shape, dtype=bool)
        for e in self.events:
            if e.hole_volume_after is not None:
                cumulative |= self.forest.cluster_mask(e.root)
                continue
            cumulative |= self.forest.cluster_mask(e.root)
            grown = ndimage.binary_dilation(cumulative, structure=TRI_STRUCTURE)
            removed = cumulative | (grown & domain.mask)
            vol = 0
            if not removed[oi, oj]:
                free = domain.mask & ~removed
                lab, _ = ndimage.label(free, structure=TRI_STRUCTURE)
                vol = int((lab == lab[oi, oj]).sum())
            e.hole_volume_after = vol
        return self

    def to_csv(self) -> str:
        if any(e.hole_volume_after is None for e in self.events):
            self.fill_hole_volumes()
        buf = io.StringIO()
        buf.write("event_index,tau,volume,surrounds_origin,hole_volume\n")
        for i, e in enumerate(self.events):
            buf.write(f"{i},{e.time!r},{e.cluster_volume},"
                      f"{int(e.surrounds_origin)},{e.hole_volume_after}\n")
        return buf.getvalue()


class FrozenForest:
    """Final state of a run: per-vertex states and cluster structure.

    state codes: 0 never activated (only in mid-time snapshots),
    1 black, 2 permanently white.
    """

    def __init__(self, domain: Domain, state, labels, tau, frozen_roots, N):
        self.domain = domain
        self.shape = domain.mask.shape
        self.state = state.reshape(self.shape)
        self.labels = labels.reshape(self.shape)
        self.tau = tau
        self.frozen_roots = dict(frozen_roots)  # root -> freeze time
        self.N = N
        labs = self.labels[self.labels >= 0]
        uniq, cnt = np.unique(labs, return_counts=True)
        self.volumes = dict(zip(uniq.tolist(), cnt.tolist()))
        self._bboxes = None

    def root_bboxes(self) -> dict:
        """Per-cluster bitmap bounding boxes (i0, i1, j0, j1), one pass."""
        if self._bboxes is None:
            ii, jj = np.nonzero(self.labels >= 0)
            ids = self.labels[ii, jj]
            uniq, inv = np.unique(ids, return_inverse=True)
            big = 1 << 30
            i0 = np.full(uniq.size, big, dtype=np.int64)
            i1 = np.full(uniq.size, -1, dtype=np.int64)
            j0 = np.full(uniq.size, big, dtype=np.int64)
            j1 = np.full(uniq.size, -1, dtype=np.int64)
            np.minimum.at(i0, inv, ii)
            np.maximum.at(i1, inv, ii)
            np.minimum.at(j0, inv, jj)
            np.maximum.at(j1, inv, jj)
            self._bboxes = {int(r): (int(a), int(b), int(c), int(d))
                            for r, a, b, c, d in zip(uniq, i0, i1, j0, j1)}
        return self._bboxes

    def root_of(self, v) -> int:
        x, y = v
        return int(self.labels[y - self.domain.y0, x - self.domain.x0])

    def volume_of_root(self, root: int) -> int:
        return self.volumes.get(root, 0)

    def is_frozen_root(self, root: int) -> bool:
        return root in self.frozen_roots

    def cluster_mask(self, root: int) -> np.ndarray:
        return self.labels == root

    def frozen_mask_at(self, p: float) -> np.ndarray:
        """Union of the clusters frozen at times <= p (they never grow after)."""
        out = np.zeros(self.shape, dtype=bool)
        for root, t in self.frozen_roots.items():
            if t <= p:
                out |= self.labels == root
        return out

    def state_codes_at(self, p: float) -> np.ndarray:
        """Per-vertex codes at time p: 'W' not yet activated, 'P' blocked,
        'B' black, 'F' black and frozen.  Off-domain cells are ' '."""
        codes = np.full(self.shape, " ", dtype="<U1")
        active = self.domain.mask & (self.tau <= p)
        codes[self.domain.mask] = "W"
        codes[active & (self.state == 2)] = "P"
        codes[active & (self.state == 1)] = "B"
        codes[self.frozen_mask_at(p) & active] = "F"
        return codes

    def final_black_set(self):
        ii, jj = np.nonzero(self.state == 1)
        return {(int(j) + self.domain.x0, int(i) + self.domain.y0)
                for i, j in zip(ii, jj)}


def run_frozen(field, domain: Domain, N: int, origin=(0, 0),
               with_trace: bool = True):
    """Event-driven run of the frozen process on a finite lattice domain.

    Returns (forest, trace); with_trace=False skips the per-event origin
    bookkeeping and returns (forest, None) (bulk statistics only need the
    final state).
    """
    if N < 1:
        raise ValueError("volume threshold must be >= 1")
    if len(domain) == 0:
        raise ValueError("empty domain")
    x0, y0, x1, y1 = domain.bounds()
    W, H = x1 - x0 + 1, y1 - y0 + 1
    tau = field.grid(x0, y0, W, H)
    ii, jj = np.nonzero(domain.mask)
    taus = tau[ii, jj]
    xs = jj.astype(np.int64) + x0
    ys = ii.astype(np.int64) + y0
    # activation order: by time, ties broken by (x, y)
    order_idx = np.lexsort((ys, xs, taus))
    order = (ii[order_idx] * W + jj[order_idx]).astype(np.int64)
    max_events = len(order) // N + 2
    ev_times = np.empty(max_events, dtype=np.float64)
    ev_roots = np.empty(max_events, dtype=np.int64)
    ev_vols = np.empty(max_events, dtype=np.int64)
    state, labels, frozen, n_ev = K.frozen_lattice(
        domain.mask.ravel(), tau.ravel(), order, W, H, N,
        ev_times, ev_roots, ev_vols)
    frozen_roots = {int(ev_roots[i]): float(ev_times[i]) for i in range(n_ev)}
    forest = FrozenForest(domain, state, labels, tau, frozen_roots, N)
    if not with_trace:
        return forest, None
    trace = _build_trace(forest, domain, ev_times[:n_ev], ev_roots[:n_ev],
                         ev_vols[:n_ev], origin)
    return forest, trace


def _cluster_surrounds(forest: FrozenForest, domain: Domain, root: int,
                       oi: int, oj: int, boundary_mask) -> bool:
    """Does the cluster enclose the origin cell (oi, oj)?

    Fast path: flood the origin's component of (not-cluster) inside the
    cluster's bounding box grown by one.  If the component stays strictly
    inside that box, it is enclosed.  If it escapes and the domain is a
    full rectangle, it reaches the domain boundary; for general domains
    fall back to a global labeling.
    """
    H, W = forest.shape
    bi0, bi1, bj0, bj1 = forest.root_bboxes()[root]
    if not (bi0 < oi < bi1 and bj0 < oj < bj1):
        return False  # origin not strictly inside the bounding box
    gi0, gi1 = max(bi0 - 1, 0), min(bi1 + 1, H - 1)
    gj0, gj1 = max(bj0 - 1, 0), min(bj1 + 1, W - 1)
    local_free = forest.labels[gi0:gi1 + 1, gj0:gj1 + 1] != root
    lab, _ = ndimage.label(local_free, structure=TRI_STRUCTURE)
    comp = lab == lab[oi - gi0, oj - gj0]
    escapes = comp[0, :].any() or comp[-1, :].any() \
        or comp[:, 0].any() or comp[:, -1].any()
    if not escapes:
        return True
    if bool(domain.mask.all()):
        # rectangle: outside the grown box, the free region reaches the edge
        return False
    free = domain.mask & (forest.labels != root)
    lab, _ = ndimage.label(free, structure=TRI_STRUCTURE)
    comp_lab = lab[oi, oj]
    return comp_lab > 0 and not bool((boundary_mask & (lab == comp_lab)).any())


def _build_trace(forest: FrozenForest, domain: Domain, ev_times, ev_roots,
                 ev_vols, origin) -> FreezeTrace:
    ox, oy = origin
    has_origin = (ox, oy) in domain
    oi, oj = oy - domain.y0, ox - domain.x0
    boundary_mask = np.zeros(forest.shape, dtype=bool)
    for (vx, vy) in inner_boundary(domain):
        boundary_mask[vy - domain.y0, vx - domain.x0] = True
    boundary_roots = set(
        int(r) for r in np.unique(forest.labels[boundary_mask]) if r >= 0)
    events = []
    touches_edge = False
    for t, root, vol in zip(ev_times, ev_roots, ev_vols):
        root = int(root)
        if root in boundary_roots:
            touches_edge = True
        origin_on = has_origin and int(forest.labels[oi, oj]) == root \
            and forest.state[oi, oj] == 1
        surrounds = False
        if has_origin and not origin_on:
            surrounds = _cluster_surrounds(forest, domain, root, oi, oj,
                                           boundary_mask)
        events.append(FreezeEvent(float(t), int(vol), surrounds, None,
                                  root, origin_on))
    final_vol, final_frozen = 0, False
    if has_origin and forest.state[oi, oj] == 1:
        root = int(forest.labels[oi, oj])
        final_vol = forest.volume_of_root(root)
        final_frozen = forest.is_frozen_root(root)
    return FreezeTrace(events, final_vol, final_frozen, touches_edge, forest)


def frozen_hole(forest: FrozenForest, p: float, origin=(0, 0)) -> Domain:
    """Component of the origin after removing the frozen set at time p
    and its outer boundary; empty if the origin is swallowed."""
    domain = forest.domain
    ox, oy = origin
    if (ox, oy) not in domain:
        raise ValueError("origin must belong to the domain")
    fmask = forest.frozen_mask_at(p)
    if not fmask.any():
        free = domain.mask
    else:
        grown = ndimage.binary_dilation(fmask, structure=TRI_STRUCTURE)
        removed = fmask | (grown & domain.mask)
        free = domain.mask & ~removed
    oi, oj = oy - domain.y0, ox - domain.x0
    if not free[oi, oj]:
        return Domain(np.zeros((0, 0), dtype=bool))
    lab, _ = ndimage.label(free, structure=TRI_STRUCTURE)
    return Domain(lab == lab[oi, oj], (domain.x0, domain.y0))


def successive_holes(field, domain: Domain, N: int, k: int):
    """Chain of (first freezing time, hole around origin) pairs.

    Each step reruns the frozen process inside the previous hole (the
    shared activation field couples the runs) and cuts out the hole left
    by its first freezing event.  Stops when nothing freezes or the
    origin is swallowed.
    """
    out = []
    current = domain
    for _ in range(k):
        if (0, 0) not in current or len(current) < N:
            break
        forest, trace = run_frozen(field, current, N)
        if not trace.events:
            break
        t1 = trace.events[0].time
        hole = frozen_hole(forest, t1)
        out.append((t1, hole))
        if len(hole) == 0:
            break
        current = hole
    return out


def surrounding_frozen_count(trace: FreezeTrace) -> int:
    """Number of freezing events whose cluster surrounds the origin."""
    return sum(1 for e in trace.events if e.surrounds_origin)


# ---------------------------------------------------------------------------
# abstract graphs: seeded runs, permutation oracle, brute force
# ---------------------------------------------------------------------------

class SmallGraph:
    """Undirected graph on vertices 0..n-1 with CSR adjacency."""

    def __init__(self, n: int, edges):
        self.n = int(n)
        adj = [[] for _ in range(self.n)]
        for u, v in edges:
            if u == v:
                raise ValueError("no self-loops")
            adj[u].append(v)
            adj[v].append(u)
        self.adj = [sorted(set(a)) for a in adj]
        self.indptr = np.zeros(self.n + 1, dtype=np.int64)
        for v in range(self.n):
            self.indptr[v + 1] = self.indptr[v] + len(self.adj[v])
        self.indices = np.array([u for a in self.adj for u in a] or [0],
                                dtype=np.int64)

    @classmethod
    def path(cls, n):
        return cls(n, [(i, i + 1) for i in range(n - 1)])

    @classmethod
    def cycle(cls, n):
        return cls(n, [(i, (i + 1) % n) for i in range(n)])

    @classmethod
    def star(cls, n):
        return cls(n, [(0, i) for i in range(1, n)])


def run_frozen_graph_batch(graph: SmallGraph, N: int, seed: int,
                           runs: int) -> np.ndarray:
    """Final black indicators of seeded runs, shape (runs, n)."""
    taus = tau_matrix(seed, runs, graph.n)
    states = K.frozen_graph_runs(graph.indptr, graph.indices, taus, N)
    return states == 1


def run_frozen_graph_taus(graph: SmallGraph, N: int, taus) -> np.ndarray:
    """Final black indicators for explicit activation times, shape (n,)."""
    arr = np.asarray(taus, dtype=np.float64).reshape(1, -1)
    states = K.frozen_graph_runs(graph.indptr, graph.indices, arr, N)
    return states[0] == 1


def permutation_oracle(adj, order, N: int) -> frozenset:
    """Reference dynamics: activate vertices in the given order, blocking a
    vertex exactly when some adjacent black cluster has >= N vertices.

    Clusters are recomputed from scratch by search at every step, so this
    shares nothing with the union-find implementation.  (A black cluster
    is frozen iff it has >= N vertices: volumes only cross the threshold
    at the activation that freezes them.)
    """
    black = set()

    def component(u):
        comp = {u}
        todo = [u]
        while todo:
            w = todo.pop()
            for z in adj[w]:
                if z in black and z not in comp:
                    comp.add(z)
                    todo.append(z)
        return comp

    for v in order:
        blocked = False
        for u in adj[v]:
            if u in black and len(component(u)) >= N:
                blocked = True
                break
        if not blocked:
            black.add(v)
    return frozenset(black)


def brute_force_frozen(graph: SmallGraph, N: int) -> dict:
    """Exact distribution of the final black set over all activation orders.

    Returns {frozenset(black vertices): Fraction probability}.  Factorial
    enumeration; refuses more than 9 vertices.
    """
    if graph.n > 9:
        raise ValueError("brute force is limited to 9 vertices")
    adj = {v: graph.adj[v] for v in range(graph.n)}
    total = math.factorial(graph.n)
    dist: dict = {}
    for order in permutations(range(graph.n)):
        final = permutation_oracle(adj, order, N)
        dist[final] = dist.get(final, 0) + 1
    return {cfg: Fraction(c, total) for cfg, c in dist.items()}


def lattice_adjacency(domain: Domain) -> dict:
    """Adjacency dict of a lattice domain, for oracle comparisons."""
    verts = domain.vertex_set()
    from .lattice import neighbors
    return {v: [u for u in neighbors(v) if u in verts] for v in verts}
