"""Static site percolation driven by a shared activation-time field.

All estimators are Monte Carlo over replica sub-fields derived from the
given field's seed, so results are reproducible functions of
(seed, parameters, sample count).  Geometry ops (cluster labeling, holes,
circuits) act on one realization of the field.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy import ndimage

from . import _kernels as K
from .lattice import (
    Annulus,
    Box,
    Domain,
    NEIGHBOR_OFFSETS,
    TRI_STRUCTURE,
    inner_boundary,
)
from .rng import derive_seed, float_bits, seed_array

P_C = 0.5

# estimator stream tags, folded into replica seeds
_S_CROSS, _S_THETA, _S_ARM, _S_PIV, _S_VN = 11, 12, 13, 14, 15


class UnsupportedArmError(ValueError):
    """Raised for arm color sequences the estimator does not measure."""


@dataclass(frozen=True)
class ArmSpec:
    """Color sequence of an arm event, e.g. ('b',) or ('b','w','b','w')."""

    colors: tuple

    def __post_init__(self):
        if len(self.colors) < 1 or any(c not in ("b", "w") for c in self.colors):
            raise ValueError("colors must be a nonempty sequence over {'b','w'}")

    @classmethod
    def parse(cls, s) -> "ArmSpec":
        if isinstance(s, ArmSpec):
            return s
        return cls(tuple(s))

    def __str__(self):
        return "".join(self.colors)


@dataclass
class MCEstimate:
    """Monte Carlo estimate with its standard error and provenance."""

    value: float
    stderr: float
    samples: int
    params: dict = dc_field(default_factory=dict)

    def __float__(self):
        return self.value


def _binomial_estimate(hits, samples, **params) -> MCEstimate:
    phat = hits / samples
    se = math.sqrt(max(phat * (1.0 - phat), 1e-300) / samples)
    return MCEstimate(phat, se, samples, params)


# ---------------------------------------------------------------------------
# cluster labeling
# ---------------------------------------------------------------------------

@dataclass
class ClusterLabeling:
    """Black clusters of a domain at parameter p.

    labels is the domain-frame int array: -1 off-cluster, otherwise the
    cluster id, which is the smallest flat index (row-major in the
    domain's bounding box) of a vertex in the cluster.
    """

    domain: Domain
    p: float
    labels: np.ndarray
    volumes: dict
    touches_boundary: set

    def label_of(self, v) -> int:
        x, y = v
        return int(self.labels[y - self.domain.y0, x - self.domain.x0])

    def cluster_count(self) -> int:
        return len(self.volumes)

    def largest(self, k: int = 1):
        """The k largest cluster (id, volume) pairs, by volume then id."""
        order = sorted(self.volumes.items(), key=lambda iv: (-iv[1], iv[0]))
        return order[:k]


def label_clusters(field, domain: Domain, p: float) -> ClusterLabeling:
    """Disjoint black components of the domain, deterministically labeled."""
    x0, y0, x1, y1 = domain.bounds()
    black = field.black_mask(x0, y0, x1 - x0 + 1, y1 - y0 + 1, p) & domain.mask
    raw, num = ndimage.label(black, structure=TRI_STRUCTURE)
    if num == 0:
        return ClusterLabeling(domain, p, np.full(domain.mask.shape, -1, dtype=np.int64),
                               {}, set())
    flat_ids = np.arange(raw.size, dtype=np.int64).reshape(raw.shape)
    smallest = np.full(num + 1, np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(smallest, raw.ravel(), flat_ids.ravel())
    labels = np.where(black, smallest[raw], -1)
    counts = np.bincount(raw.ravel(), minlength=num + 1)
    volumes = {int(smallest[i]): int(counts[i]) for i in range(1, num + 1)}
    boundary = inner_boundary(domain)
    touches = set()
    for x, y in boundary:
        lab = labels[y - domain.y0, x - domain.x0]
        if lab >= 0:
            touches.add(int(lab))
    return ClusterLabeling(domain, p, labels, volumes, touches)


# ---------------------------------------------------------------------------
# crossings and the characteristic length
# ---------------------------------------------------------------------------

def has_crossing(field, rect, p: float, orientation: str = "h",
                 color: str = "b") -> bool:
    """Colored path joining the two opposite sides of an axial rectangle.

    rect is (x0, y0, x1, y1) inclusive, or a Box.  orientation 'h'
    connects the two vertical sides, 'v' the two horizontal ones.
    """
    if isinstance(rect, Box):
        rect = rect.bounds()
    x0, y0, x1, y1 = rect
    w, h = x1 - x0 + 1, y1 - y0 + 1
    if w <= 0 or h <= 0 or (orientation == "h" and w < 2) or (orientation == "v" and h < 2):
        raise ValueError("degenerate rectangle")
    return bool(K.crossing_one(np.uint64(field.seed), x0, y0, w, h, p,
                               orientation == "h", color == "b"))


def mask_has_crossing(mask: np.ndarray, orientation: str = "h") -> bool:
    """Crossing of an explicit boolean mask (True = passable)."""
    if mask.size == 0:
        return False
    return bool(K.mask_crossing(np.ascontiguousarray(mask), orientation == "h"))


@dataclass
class LengthEstimate:
    """Interpolated characteristic length, with saturation flags."""

    value: float
    saturated: str | None  # None, 'low', or 'high'
    probes: dict
    p: float
    samples: int

    def __float__(self):
        return self.value


def _crossing_probability(field, q: float, n: int, samples: int) -> float:
    seeds = seed_array(field.seed, derive_seed(_S_CROSS, float_bits(q), n), samples)
    hits = int(K.crossing_many(seeds, 0, 0, n + 1, 2 * n + 1, q, True, True).sum())
    return hits / samples


def estimate_characteristic_length(field, p: float, samples: int = 2000,
                                   n_max: int = 512,
                                   threshold: float = 0.01) -> LengthEstimate:
    """Largest n at which the easy-direction off-critical crossing of an
    n x 2n rectangle still has probability >= threshold, linearly
    interpolated between the bracketing integers.

    Defined through the subcritical side: for p > 1/2 the value at 1 - p
    is returned (black/white symmetry).
    """
    if samples < 10:
        raise ValueError("sample count too small")
    if p == P_C:
        raise ValueError("characteristic length is undefined at the critical point")
    q = p if p < P_C else 1.0 - p
    probes: dict = {}

    def probe(n):
        if n not in probes:
            probes[n] = _crossing_probability(field, q, n, samples)
        return probes[n]

    if probe(1) < threshold:
        return LengthEstimate(0.0, "low", probes, p, samples)
    n = 1
    while 2 * n <= n_max and probe(2 * n) >= threshold:
        n *= 2
    if 2 * n > n_max:
        if probe(n_max) >= threshold:
            return LengthEstimate(float(n_max), "high", probes, p, samples)
        lo, hi = n, n_max
    else:
        lo, hi = n, 2 * n
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if probe(mid) >= threshold:
            lo = mid
        else:
            hi = mid
    p_lo, p_hi = probe(lo), probe(hi)
    frac = 0.0 if p_lo <= p_hi else (p_lo - threshold) / (p_lo - p_hi)
    return LengthEstimate(lo + min(max(frac, 0.0), 1.0), None, probes, p, samples)


def estimate_theta(field, p: float, window_factor: float = 8.0,
                   samples: int = 2000, L: float | None = None) -> MCEstimate:
    """Density proxy: probability that the origin is black and reaches
    distance window_factor * L(p) inside the ball of that radius."""
    if p <= P_C:
        raise ValueError("theta estimation needs a supercritical parameter")
    if window_factor < 1:
        raise ValueError("window factor must be >= 1")
    if L is None:
        L = estimate_characteristic_length(field, p, samples=max(samples, 1000)).value
    R = max(1, int(round(window_factor * max(L, 1.0))))
    seeds = seed_array(field.seed, derive_seed(_S_THETA, float_bits(p), R), samples)
    hits = int(K.theta_hits(seeds, p, R).sum())
    return _binomial_estimate(hits, samples, p=p, radius=R, window_factor=window_factor)


# ---------------------------------------------------------------------------
# arm events
# ---------------------------------------------------------------------------

def estimate_arm(field, spec, m: int, n: int, p: float,
                 samples: int = 10000) -> MCEstimate:
    """Arm probability across the annulus Ann_{m,n}.

    Supported color sequences: ('b',) and ('w',) measured directly, and
    ('b','w','b','w') measured through the pivotality proxy: the center
    site of Ball_n is pivotal for the black horizontal crossing of
    Ball_n exactly when it carries four alternating arms.  Other
    sequences raise UnsupportedArmError.
    """
    spec = ArmSpec.parse(spec)
    if not (0 <= m <= n):
        raise ValueError("need 0 <= m <= n")
    if m == n:
        return MCEstimate(1.0, 0.0, samples, {"degenerate": True})
    tag = derive_seed(_S_ARM, float_bits(p), m, n, len(spec.colors))
    if spec.colors in (("b",), ("w",)):
        seeds = seed_array(field.seed, tag, samples)
        hits = int(K.arm_annulus(seeds, p, m, n, spec.colors == ("b",)).sum())
        return _binomial_estimate(hits, samples, spec=str(spec), m=m, n=n, p=p)
    if spec.colors == ("b", "w", "b", "w"):
        seeds = seed_array(field.seed, derive_seed(_S_PIV, float_bits(p), n), samples)
        hits = int(K.pivotal_hits(seeds, p, n).sum())
        return _binomial_estimate(hits, samples, spec=str(spec), n=n, p=p,
                                  proxy="center-pivotality")
    raise UnsupportedArmError(f"arm sequence {spec} is not measured")


def one_arm_profile(field, radii, p: float = P_C, samples: int = 10000,
                    color: str = "b") -> dict:
    """pi_1(0, n) for several radii at once, on shared replicas.

    Uses a staged flood so each replica is explored only once; the
    indicators for the different radii are coupled (nested), which is
    statistically fine for slope fits.
    """
    radii = np.asarray(sorted(radii), dtype=np.int64)
    seeds = seed_array(field.seed, derive_seed(_S_ARM, float_bits(p), int(radii[-1]), 1),
                       samples)
    hits = K.arm_staged(seeds, p, radii, color == "b")
    return {int(r): _binomial_estimate(int(hits[i].sum()), samples, n=int(r), p=p)
            for i, r in enumerate(radii)}


# ---------------------------------------------------------------------------
# circuits
# ---------------------------------------------------------------------------

@dataclass
class Circuit:
    """A black circuit: its vertex set and the region it encloses."""

    vertices: frozenset
    interior: Domain
    at_parameter: float

    @property
    def diameter(self) -> int:
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return max(max(xs) - min(xs), max(ys) - min(ys))

    def cycle_order(self):
        """Vertices ordered into a closed walk (greedy nearest-neighbor).

        Works for the simple circuits produced on small annuli; the set
        representation is authoritative.
        """
        verts = set(self.vertices)
        start = min(verts)
        walk = [start]
        verts.discard(start)
        from .lattice import neighbors as nbrs
        while verts:
            found = None
            for u in nbrs(walk[-1]):
                if u in verts:
                    found = u
                    break
            if found is None:
                raise ValueError("circuit set is not a traceable cycle")
            walk.append(found)
            verts.discard(found)
        return walk


def outermost_circuit(field, annulus: Annulus, p: float) -> Circuit | None:
    """Outermost black circuit in the annulus, or None.

    Built as the interface of the exterior-reachable white region: white
    sites of the annulus are flooded from outside the outer ball, and
    the circuit is the set of black annulus sites adjacent to the
    reached region.  A circuit exists exactly when the white flood does
    not reach the inner ball (no white arm across the annulus).
    """
    if annulus.outer is None:
        raise ValueError("outermost circuit needs a bounded annulus")
    cx, cy = annulus.center
    m, n = annulus.inner, annulus.outer
    side = 2 * n + 1
    black = field.black_mask(cx - n, cy - n, side, side, p)
    yy, xx = np.mgrid[-n:n + 1, -n:n + 1]
    d = np.maximum(np.abs(xx), np.abs(yy))
    in_annulus = (d > m) & (d <= n)

    # flood the white part of the annulus from the outer rim
    passable = in_annulus & ~black
    frame = np.zeros((side + 2, side + 2), dtype=bool)
    frame[1:-1, 1:-1] = passable
    seed_mask = np.zeros_like(frame)
    seed_mask[0, :] = seed_mask[-1, :] = True
    seed_mask[:, 0] = seed_mask[:, -1] = True
    frame[0, :] = frame[-1, :] = frame[:, 0] = frame[:, -1] = True
    reached = ndimage.binary_propagation(seed_mask, mask=frame,
                                         structure=TRI_STRUCTURE)[1:-1, 1:-1]
    # white arm across the annulus: reached white site adjacent to Ball_m
    reached_white = reached & passable
    grown = np.zeros((side + 2, side + 2), dtype=bool)
    grown[1:-1, 1:-1] = d <= m
    acc = np.zeros_like(grown)
    for dx, dy in NEIGHBOR_OFFSETS:
        acc |= np.roll(np.roll(grown, dy, axis=0), dx, axis=1)
    near_inner = acc[1:-1, 1:-1] & ~(d <= m)
    if (reached_white & near_inner).any():
        return None

    # exterior-reachable = reached white cells plus the world outside Ball_n
    ext = np.zeros((side + 2, side + 2), dtype=bool)
    ext[1:-1, 1:-1] = reached_white
    ext[0, :] = ext[-1, :] = ext[:, 0] = ext[:, -1] = True
    adj_ext = np.zeros_like(ext)
    for dx, dy in NEIGHBOR_OFFSETS:
        adj_ext |= np.roll(np.roll(ext, dy, axis=0), dx, axis=1)
    circuit_mask = black & in_annulus & adj_ext[1:-1, 1:-1]
    if not circuit_mask.any():
        return None
    ii, jj = np.nonzero(circuit_mask)
    vertices = frozenset((int(j) - n + cx, int(i) - n + cy) for i, j in zip(ii, jj))
    comp = ~circuit_mask
    lab, _ = ndimage.label(comp, structure=TRI_STRUCTURE)
    interior_mask = lab == lab[n, n]
    interior = Domain(interior_mask, (cx - n, cy - n))
    return Circuit(vertices, interior, p)


def circuit_mass(field, circuit: Circuit, p: float) -> int:
    """Number of interior vertices black-connected to the circuit."""
    dom = circuit.interior
    x0, y0, x1, y1 = dom.bounds()
    black = field.black_mask(x0, y0, x1 - x0 + 1, y1 - y0 + 1, p) & dom.mask
    # seeds: interior black sites adjacent to a circuit vertex
    seed = np.zeros_like(black)
    for (vx, vy) in circuit.vertices:
        for dx, dy in NEIGHBOR_OFFSETS:
            x, y = vx + dx, vy + dy
            if x0 <= x <= x1 and y0 <= y <= y1 and black[y - y0, x - x0]:
                seed[y - y0, x - x0] = True
    if not seed.any():
        return 0
    reached = ndimage.binary_propagation(seed, mask=black, structure=TRI_STRUCTURE)
    return int(reached.sum())


def niceness_functional(circuit: Circuit, p: float, calib) -> float:
    """Dyadic-shell weighted interior mass of a circuit.

    Shell i counts interior vertices at circuit-distance in
    [2^(i-1), 2^i), weighted by the one-arm probability at radius
    2^(i-1); shells run while 2^i stays below the characteristic length.
    calib must provide pi1(radius), theta(p) and L(p).
    """
    if calib is None:
        raise ValueError("a pi_1 calibration is required")
    Lp = calib.L(p)
    imax = math.ceil(math.log2(Lp)) - 1 if Lp > 2 else 0
    if imax < 1:
        return 0.0
    dom = circuit.interior
    if len(dom) == 0:
        return 0.0
    x0, y0, x1, y1 = dom.bounds()
    h, w = dom.mask.shape
    frame = np.ones((h + 2, w + 2), dtype=bool)
    for (vx, vy) in circuit.vertices:
        if x0 - 1 <= vx <= x1 + 1 and y0 - 1 <= vy <= y1 + 1:
            frame[vy - (y0 - 1), vx - (x0 - 1)] = False
    dist = ndimage.distance_transform_cdt(frame, metric="chessboard")[1:-1, 1:-1]
    dvals = dist[dom.mask]
    total = 0.0
    for i in range(1, imax + 1):
        count = int(((dvals >= 2 ** (i - 1)) & (dvals < 2 ** i)).sum())
        total += count * calib.pi1(2 ** (i - 1))
    return total


def is_nice(circuit: Circuit, p: float, K_const: float, calib) -> bool:
    """f_p(circuit) <= K * diam(circuit)^2 * theta(p)."""
    f = niceness_functional(circuit, p, calib)
    return f <= K_const * circuit.diameter ** 2 * calib.theta(p)


# ---------------------------------------------------------------------------
# holes
# ---------------------------------------------------------------------------

@dataclass
class Hole:
    """Connected component of the origin left after removing a blocking
    cluster and its white outer boundary."""

    region: Domain
    outer_circuit: frozenset
    at_parameter: float

    @property
    def volume(self) -> int:
        return len(self.region)

    @property
    def empty(self) -> bool:
        return len(self.region) == 0


def _empty_hole(p: float) -> Hole:
    return Hole(Domain(np.zeros((0, 0), dtype=bool)), frozenset(), p)


def hole_of_origin(field, window_radius: int, p: float,
                   L: float | None = None) -> Hole | None:
    """Hole of the origin in the (finite-window proxy of the) unbounded
    black cluster at p.

    The unbounded cluster is approximated by the union of black clusters
    touching the window boundary.  Returns an empty Hole when the origin
    lies in the removed set, and None (no surrounding cluster; a
    low-confidence outcome) when the origin's component touches the
    window edge.
    """
    if p <= P_C:
        raise ValueError("holes are defined for supercritical parameters")
    R = int(window_radius)
    if L is not None and (2 * R + 1) < 8 * L:
        warnings.warn("window smaller than 8 L(p); hole may be truncated",
                      stacklevel=2)
    side = 2 * R + 1
    black = field.black_mask(-R, -R, side, side, p)
    lab, num = ndimage.label(black, structure=TRI_STRUCTURE)
    edge_labels = set(np.unique(lab[0, :])) | set(np.unique(lab[-1, :])) \
        | set(np.unique(lab[:, 0])) | set(np.unique(lab[:, -1]))
    edge_labels.discard(0)
    if not edge_labels:
        return None
    giant = np.isin(lab, sorted(edge_labels))
    return _hole_around_origin(giant, black, R, p, require_enclosed=True)


def _hole_around_origin(removed_core: np.ndarray, black: np.ndarray, R: int,
                        p: float, require_enclosed: bool) -> Hole | None:
    side = removed_core.shape[0]
    grown = ndimage.binary_dilation(removed_core, structure=TRI_STRUCTURE)
    removed = removed_core | (grown & ~black)  # cluster plus its white boundary
    if removed[R, R]:
        return _empty_hole(p)
    free = ~removed
    lab, _ = ndimage.label(free, structure=TRI_STRUCTURE)
    comp = lab == lab[R, R]
    if require_enclosed:
        touches_edge = comp[0, :].any() or comp[-1, :].any() \
            or comp[:, 0].any() or comp[:, -1].any()
        if touches_edge:
            return None
    region = Domain(comp, (-R, -R))
    boundary = ndimage.binary_dilation(comp, structure=TRI_STRUCTURE) & ~comp
    ii, jj = np.nonzero(boundary & removed)
    circuit = frozenset((int(j) - R, int(i) - R) for i, j in zip(ii, jj))
    return Hole(region, circuit, p)


def hole_in_domain(field, domain: Domain, p: float) -> Hole:
    """Explorable-from-outside hole: remove the domain's inner boundary,
    everything black connected to it, and the white boundary of that set;
    return the origin's component (possibly empty).

    The result is a stopping set: it depends only on the configuration
    outside its own interior.
    """
    if (0, 0) not in domain:
        raise ValueError("origin must belong to the domain")
    x0, y0, x1, y1 = domain.bounds()
    w, h = x1 - x0 + 1, y1 - y0 + 1
    black = field.black_mask(x0, y0, w, h, p) & domain.mask
    ib = np.zeros_like(domain.mask)
    for (vx, vy) in inner_boundary(domain):
        ib[vy - y0, vx - x0] = True
    seeds = ib & black
    cluster = ndimage.binary_propagation(seeds, mask=black, structure=TRI_STRUCTURE)
    # removed: the inner boundary, the black set grown from it, and the
    # white outer boundary of that black set (not of the inner boundary)
    white_rim = ndimage.binary_dilation(cluster, structure=TRI_STRUCTURE) \
        & domain.mask & ~black
    removed = ib | cluster | white_rim
    oi, oj = -y0, -x0
    if removed[oi, oj]:
        return _empty_hole(p)
    free = domain.mask & ~removed
    lab, _ = ndimage.label(free, structure=TRI_STRUCTURE)
    comp = lab == lab[oi, oj]
    region = Domain(comp, (x0, y0))
    boundary = ndimage.binary_dilation(comp, structure=TRI_STRUCTURE) & ~comp
    ii, jj = np.nonzero(boundary & removed)
    circuit = frozenset((int(j) + x0, int(i) + y0) for i, j in zip(ii, jj))
    return Hole(region, circuit, p)


# ---------------------------------------------------------------------------
# nets
# ---------------------------------------------------------------------------

@dataclass
class NetResult:
    """Outcome of the net test at mesh a inside radius b."""

    ok: bool
    a: int
    b: int
    rectangles: int
    failed_at: tuple | None
    residual_diameter_bound: int  # non-net clusters meeting Ball_b are smaller

    def __bool__(self):
        return self.ok


def net_event(field, a: int, b: int, p: float) -> NetResult:
    """All long-direction black crossings of the 2a x 4a rectangle grid.

    When the event holds, the crossings glue into a single cluster (the
    net) and every other cluster intersecting Ball_b has diameter at
    most 4a.
    """
    if not (0 < a < b):
        raise ValueError("need 0 < a < b")
    kmax = math.ceil(b / (2 * a)) + 1
    checked = 0
    for k1 in range(-kmax, kmax + 1):
        for k2 in range(-kmax, kmax + 1):
            for (n1, n2) in ((k1 + 1, k2), (k1, k2 + 1)):
                if abs(n1) > kmax or abs(n2) > kmax:
                    continue
                cx1, cy1 = 2 * a * k1, 2 * a * k2
                cx2, cy2 = 2 * a * n1, 2 * a * n2
                x_lo, x_hi = min(cx1, cx2) - a, max(cx1, cx2) + a
                y_lo, y_hi = min(cy1, cy2) - a, max(cy1, cy2) + a
                horizontal = (x_hi - x_lo) > (y_hi - y_lo)
                checked += 1
                ok = bool(K.crossing_one(np.uint64(field.seed), x_lo, y_lo,
                                         x_hi - x_lo + 1, y_hi - y_lo + 1,
                                         p, horizontal, True))
                if not ok:
                    return NetResult(False, a, b, checked, ((k1, k2), (n1, n2)), 4 * a)
    return NetResult(True, a, b, checked, None, 4 * a)


# ---------------------------------------------------------------------------
# boundary-connected volume
# ---------------------------------------------------------------------------

def count_connected_to_boundary(field, z, n: int, p: float) -> int:
    """|{v in Ball_n(z) : v black-connected to distance 2n from z}|."""
    if n < 1:
        raise ValueError("radius must be >= 1")
    return int(K.count_connected_to_boundary(np.uint64(field.seed), p, n,
                                             int(z[0]), int(z[1])))


def vn_samples(field, n: int, p: float, samples: int) -> np.ndarray:
    """Independent replicas of the boundary-connected volume statistic."""
    seeds = seed_array(field.seed, derive_seed(_S_VN, float_bits(p), n), samples)
    out = np.empty(samples, dtype=np.int64)
    for i, s in enumerate(seeds):
        out[i] = K.count_connected_to_boundary(np.uint64(s), p, n, 0, 0)
    return out


# ---------------------------------------------------------------------------
# quantiles
# ---------------------------------------------------------------------------

def empirical_quantiles(samples, eps: float):
    """Lower and upper eps-quantiles of the empirical measure.

    lower = inf{x : P(X <= x) >= eps}, upper = sup{x : P(X >= x) >= eps};
    on the empirical measure P(X < lower) <= eps and P(X > upper) <= eps.
    """
    a = np.sort(np.asarray(samples, dtype=float))
    if a.size == 0:
        raise ValueError("empty sample")
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must be in (0, 1)")
    k = math.ceil(eps * a.size)
    return float(a[k - 1]), float(a[a.size - k])
