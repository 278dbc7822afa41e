"""Triangular-lattice geometry in axial coordinates.

Vertices are integer pairs (x, y); the six neighbors of (x, y) are
(x+1, y), (x, y+1), (x-1, y+1), (x-1, y), (x, y-1), (x+1, y-1), listed
counter-clockwise in the standard planar embedding.  This is the square
grid plus the anti-diagonal, which makes the lattice a triangulation
(hence self-matching: black and white crossings of a box are exactly
complementary events).

"Ball_n" is the axial box [-n, n]^2 and all distances are the axial
L-infinity distance max(|dx|, |dy|); both stand in for their Euclidean
counterparts throughout.  Domains are finite vertex sets stored as a
bounding box plus a boolean bitmap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

# Counter-clockwise neighbor offsets; order is part of the public contract.
NEIGHBOR_OFFSETS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))

# 3x3 structuring element for scipy.ndimage, rows indexed by dy, columns by dx.
TRI_STRUCTURE = np.array(
    [[0, 1, 1],
     [1, 1, 1],
     [1, 1, 0]], dtype=bool)


def neighbors(v):
    """The 6 neighbors of vertex v = (x, y), in counter-clockwise order."""
    x, y = v
    return [(x + dx, y + dy) for dx, dy in NEIGHBOR_OFFSETS]


def dist_inf(u, v) -> int:
    """Axial L-infinity distance."""
    return max(abs(u[0] - v[0]), abs(u[1] - v[1]))


@dataclass(frozen=True)
class Box:
    """Axial box of radius n around a center: center + [-n, n]^2."""

    center: tuple = (0, 0)
    radius: int = 0

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("box radius must be >= 0")

    @property
    def side(self) -> int:
        return 2 * self.radius + 1

    def vertex_count(self) -> int:
        return self.side ** 2

    def contains(self, v) -> bool:
        return dist_inf(v, self.center) <= self.radius

    def bounds(self):
        """(x0, y0, x1, y1), inclusive corners."""
        cx, cy = self.center
        n = self.radius
        return (cx - n, cy - n, cx + n, cy + n)


@dataclass(frozen=True)
class Annulus:
    """Ball_outer minus Ball_inner around a center; outer=None means 'window edge'."""

    center: tuple = (0, 0)
    inner: int = 0
    outer: int | None = None

    def __post_init__(self):
        if self.outer is not None and not (self.inner < self.outer):
            raise ValueError("annulus needs inner < outer")

    def contains(self, v) -> bool:
        d = dist_inf(v, self.center)
        return d > self.inner and (self.outer is None or d <= self.outer)


class Domain:
    """Finite vertex set, stored as bitmap over its bounding box.

    mask is indexed [y - y0, x - x0].  Connectivity (under the 6-neighbor
    adjacency) and simple-connectivity are computed on demand and cached.
    """

    def __init__(self, mask: np.ndarray, origin=(0, 0)):
        mask = np.asarray(mask, dtype=bool)
        if mask.ndim != 2:
            raise ValueError("mask must be 2-dimensional")
        self.mask = mask
        self.x0, self.y0 = int(origin[0]), int(origin[1])
        self._connected = None
        self._simply_connected = None

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_vertices(cls, vertices) -> "Domain":
        vs = list(vertices)
        if not vs:
            return cls(np.zeros((0, 0), dtype=bool))
        xs = [v[0] for v in vs]
        ys = [v[1] for v in vs]
        x0, y0 = min(xs), min(ys)
        mask = np.zeros((max(ys) - y0 + 1, max(xs) - x0 + 1), dtype=bool)
        for x, y in vs:
            mask[y - y0, x - x0] = True
        return cls(mask, (x0, y0))

    @classmethod
    def box(cls, b: Box) -> "Domain":
        x0, y0, x1, y1 = b.bounds()
        return cls(np.ones((y1 - y0 + 1, x1 - x0 + 1), dtype=bool), (x0, y0))

    @classmethod
    def ball(cls, n: int, center=(0, 0)) -> "Domain":
        return cls.box(Box(center, n))

    # -- basic queries -----------------------------------------------------

    def __len__(self):
        return int(self.mask.sum())

    def __contains__(self, v):
        x, y = v
        i, j = y - self.y0, x - self.x0
        if 0 <= i < self.mask.shape[0] and 0 <= j < self.mask.shape[1]:
            return bool(self.mask[i, j])
        return False

    def __eq__(self, other):
        if not isinstance(other, Domain):
            return NotImplemented
        return self.vertex_set() == other.vertex_set()

    def vertices(self):
        ii, jj = np.nonzero(self.mask)
        return [(int(j) + self.x0, int(i) + self.y0) for i, j in zip(ii, jj)]

    def vertex_set(self):
        return frozenset(self.vertices())

    def bounding_box(self) -> Box:
        """Smallest origin-centered-style box: center at bitmap center, radius to cover."""
        h, w = self.mask.shape
        cx = self.x0 + (w - 1) // 2
        cy = self.y0 + (h - 1) // 2
        r = 0
        for x, y in ((self.x0, self.y0), (self.x0 + w - 1, self.y0 + h - 1)):
            r = max(r, abs(x - cx), abs(y - cy))
        return Box((cx, cy), r)

    def bounds(self):
        h, w = self.mask.shape
        return (self.x0, self.y0, self.x0 + w - 1, self.y0 + h - 1)

    def is_connected(self) -> bool:
        if self._connected is None:
            if len(self) == 0:
                self._connected = True
            else:
                _, num = ndimage.label(self.mask, structure=TRI_STRUCTURE)
                self._connected = num <= 1
        return self._connected

    def is_simply_connected(self) -> bool:
        """True when the complement has no bounded component.

        Computed by flood-filling the complement inside the bounding box
        grown by one: simply connected iff every complement cell is
        reached from the border.
        """
        if self._simply_connected is None:
            if not self.is_connected():
                self._simply_connected = False
            else:
                grown = np.zeros(
                    (self.mask.shape[0] + 2, self.mask.shape[1] + 2), dtype=bool)
                grown[1:-1, 1:-1] = self.mask
                comp = ~grown
                lab, num = ndimage.label(comp, structure=TRI_STRUCTURE)
                border_labels = set(np.unique(lab[0, :])) | set(np.unique(lab[-1, :])) \
                    | set(np.unique(lab[:, 0])) | set(np.unique(lab[:, -1]))
                border_labels.discard(0)
                all_labels = set(range(1, num + 1))
                self._simply_connected = all_labels == border_labels
        return self._simply_connected

    # -- geometry helpers used everywhere ----------------------------------

    def shifted_masks(self):
        """Union of the 6 neighbor-shifts of the bitmap, on the grown frame."""
        h, w = self.mask.shape
        grown = np.zeros((h + 2, w + 2), dtype=bool)
        acc = np.zeros_like(grown)
        grown[1:-1, 1:-1] = self.mask
        for dx, dy in NEIGHBOR_OFFSETS:
            acc |= np.roll(np.roll(grown, dy, axis=0), dx, axis=1)
        return grown, acc

    def translate_to(self, window: "Domain") -> np.ndarray:
        """Bitmap of this domain in the frame of another domain's bitmap."""
        out = np.zeros_like(window.mask)
        x0, y0, x1, y1 = self.bounds()
        wx0, wy0, wx1, wy1 = window.bounds()
        ix0, iy0 = max(x0, wx0), max(y0, wy0)
        ix1, iy1 = min(x1, wx1), min(y1, wy1)
        if ix0 > ix1 or iy0 > iy1:
            return out
        out[iy0 - wy0:iy1 - wy0 + 1, ix0 - wx0:ix1 - wx0 + 1] = \
            self.mask[iy0 - self.y0:iy1 - self.y0 + 1, ix0 - self.x0:ix1 - self.x0 + 1]
        return out

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        """Compact form: bounding box + row-major run-length-encoded bitmap."""
        flat = self.mask.ravel().astype(np.int8)
        runs = []
        current, count = 0, 0
        for v in flat:
            if v == current:
                count += 1
            else:
                runs.append(int(count))
                current, count = v, 1
        runs.append(int(count))
        x0, y0, x1, y1 = self.bounds() if self.mask.size else (self.x0, self.y0, self.x0 - 1, self.y0 - 1)
        return {"bbox": [x0, y0, x1, y1], "bitmap": runs}

    @classmethod
    def from_json(cls, data: dict) -> "Domain":
        x0, y0, x1, y1 = data["bbox"]
        w, h = x1 - x0 + 1, y1 - y0 + 1
        if w <= 0 or h <= 0:
            return cls(np.zeros((0, 0), dtype=bool), (x0, y0))
        flat = np.zeros(w * h, dtype=bool)
        pos, value = 0, False
        for run in data["bitmap"]:
            if value:
                flat[pos:pos + run] = True
            pos += run
            value = not value
        return cls(flat.reshape(h, w), (x0, y0))


def inner_boundary(domain: Domain) -> set:
    """Sites of the domain adjacent to its complement."""
    if len(domain) == 0:
        return set()
    grown, shifted_comp = _complement_shift(domain)
    inner = grown & shifted_comp
    return _frame_vertices(domain, inner)


def outer_boundary(domain: Domain) -> set:
    """Sites of the complement adjacent to the domain (within bbox + 1)."""
    if len(domain) == 0:
        return set()
    grown, acc = domain.shifted_masks()
    outer = acc & ~grown
    return _frame_vertices(domain, outer)


def _complement_shift(domain: Domain):
    h, w = domain.mask.shape
    grown = np.zeros((h + 2, w + 2), dtype=bool)
    grown[1:-1, 1:-1] = domain.mask
    comp = ~grown
    acc = np.zeros_like(grown)
    for dx, dy in NEIGHBOR_OFFSETS:
        acc |= np.roll(np.roll(comp, dy, axis=0), dx, axis=1)
    return grown, acc


def _frame_vertices(domain: Domain, frame_mask: np.ndarray) -> set:
    ii, jj = np.nonzero(frame_mask)
    return {(int(j) - 1 + domain.x0, int(i) - 1 + domain.y0) for i, j in zip(ii, jj)}


@dataclass
class BlockGrid:
    """Union of l-blocks: axial blocks of l x l vertices tiling the plane.

    Block (0, 0) is centered on the origin (it covers [-l//2, -l//2 + l)
    in both coordinates), so it always contains the vertex (0, 0).
    """

    block_side: int
    occupied: set = field(default_factory=set)

    def __post_init__(self):
        if self.block_side < 1:
            raise ValueError("block side must be >= 1")
        self.occupied = set(self.occupied)

    def block_index(self, v) -> tuple:
        s = self.block_side // 2
        return ((v[0] + s) // self.block_side, (v[1] + s) // self.block_side)

    def block_range(self, k: int):
        """Inclusive coordinate range covered by block index k (1-d)."""
        s = self.block_side // 2
        lo = k * self.block_side - s
        return lo, lo + self.block_side - 1

    def vertex_count(self) -> int:
        return len(self.occupied) * self.block_side ** 2

    def to_domain(self) -> Domain:
        if not self.occupied:
            return Domain(np.zeros((0, 0), dtype=bool))
        ks = np.array(sorted(self.occupied), dtype=int)
        k0x, k0y = ks[:, 0].min(), ks[:, 1].min()
        k1x, k1y = ks[:, 0].max(), ks[:, 1].max()
        l = self.block_side
        mask = np.zeros(((k1y - k0y + 1) * l, (k1x - k0x + 1) * l), dtype=bool)
        for kx, ky in self.occupied:
            iy = (ky - k0y) * l
            ix = (kx - k0x) * l
            mask[iy:iy + l, ix:ix + l] = True
        x0 = self.block_range(k0x)[0]
        y0 = self.block_range(k0y)[0]
        return Domain(mask, (x0, y0))

    def is_connected(self) -> bool:
        """Connectivity under 4-adjacency of blocks."""
        if not self.occupied:
            return True
        todo = {next(iter(self.occupied))}
        seen = set()
        while todo:
            k = todo.pop()
            seen.add(k)
            kx, ky = k
            for nk in ((kx + 1, ky), (kx - 1, ky), (kx, ky + 1), (kx, ky - 1)):
                if nk in self.occupied and nk not in seen:
                    todo.add(nk)
        return seen == self.occupied


def outer_approx(domain: Domain, l: int) -> BlockGrid:
    """All l-blocks that intersect the domain."""
    if l < 1:
        raise ValueError("block side must be >= 1")
    grid = BlockGrid(l)
    ii, jj = np.nonzero(domain.mask)
    ks = set()
    s = l // 2
    for i, j in zip(ii, jj):
        ks.add(((int(j) + domain.x0 + s) // l, ((int(i) + domain.y0 + s) // l)))
    grid.occupied = ks
    return grid


def inner_approx(domain: Domain, l: int) -> BlockGrid:
    """Connected block component of the origin block among blocks inside the domain.

    Empty when the origin block b_l is not contained in the domain.
    """
    if l < 1:
        raise ValueError("block side must be >= 1")
    grid = BlockGrid(l)
    candidates = set()
    for k in outer_approx(domain, l).occupied:
        if _block_inside(domain, grid, k):
            candidates.add(k)
    if (0, 0) not in candidates:
        return grid
    todo, comp = {(0, 0)}, set()
    while todo:
        k = todo.pop()
        comp.add(k)
        kx, ky = k
        for nk in ((kx + 1, ky), (kx - 1, ky), (kx, ky + 1), (kx, ky - 1)):
            if nk in candidates and nk not in comp:
                todo.add(nk)
    grid.occupied = comp
    return grid


def _block_inside(domain: Domain, grid: BlockGrid, k) -> bool:
    x_lo, x_hi = grid.block_range(k[0])
    y_lo, y_hi = grid.block_range(k[1])
    bx0, by0, bx1, by1 = domain.bounds()
    if x_lo < bx0 or y_lo < by0 or x_hi > bx1 or y_hi > by1:
        return False
    sub = domain.mask[y_lo - domain.y0:y_hi - domain.y0 + 1,
                      x_lo - domain.x0:x_hi - domain.x0 + 1]
    return bool(sub.all())


@dataclass
class Approximability:
    """Outcome of the block-approximation test for a domain."""

    ok: bool
    l: int
    eta: float
    domain_volume: int
    inner_volume: int
    outer_volume: int
    sandwich_volume: int  # |outer \ inner|

    def __bool__(self):
        return self.ok

    @property
    def inner_bound_holds(self) -> bool:
        # implied bound |D_int| > (1 - eta) |domain|
        return self.inner_volume > (1.0 - self.eta) * self.domain_volume

    @property
    def outer_bound_holds(self) -> bool:
        # implied bound |D_ext| < (1 + eta) |domain|
        return self.outer_volume < (1.0 + self.eta) * self.domain_volume


def is_approximable(domain: Domain, l: int, eta: float) -> Approximability:
    """Block-approximability: origin block inside, and |outer \\ inner| < eta |domain|."""
    if not (0.0 < eta < 1.0):
        raise ValueError("eta must be in (0, 1)")
    inner = inner_approx(domain, l)
    outer = outer_approx(domain, l)
    inner_vol = inner.vertex_count()
    outer_vol = outer.vertex_count()
    sandwich = outer_vol - len(inner.occupied & outer.occupied) * l * l
    # inner blocks are always outer blocks, so sandwich = outer_vol - inner_vol
    ok = bool(inner.occupied) and sandwich < eta * len(domain)
    return Approximability(ok, l, eta, len(domain), inner_vol, outer_vol, sandwich)


def shrink(region, epsilon: float, block_side: int | None = None) -> Domain:
    """Remove the (epsilon * l)-neighborhood of the complement.

    region may be a BlockGrid (l taken from it) or a Domain (then
    block_side must be given).  Keeps the vertices whose L-infinity
    distance to the complement is >= epsilon * l.  For a union of
    l-blocks and epsilon in (0, 1/4) the volume satisfies
    (1 - 4 eps) |region| <= |shrunk| <= |region|.
    """
    if isinstance(region, BlockGrid):
        l = region.block_side
        domain = region.to_domain()
    else:
        if block_side is None:
            raise ValueError("block_side required when shrinking a Domain")
        l = block_side
        domain = region
    if epsilon < 0 or epsilon >= 1.0:
        raise ValueError("epsilon must be in [0, 1)")
    if epsilon == 0.0 or len(domain) == 0:
        return Domain(domain.mask.copy(), (domain.x0, domain.y0))
    h, w = domain.mask.shape
    grown = np.zeros((h + 2, w + 2), dtype=bool)
    grown[1:-1, 1:-1] = domain.mask
    dist = ndimage.distance_transform_cdt(grown, metric="chessboard")
    keep = dist[1:-1, 1:-1] >= epsilon * l
    return Domain(keep, (domain.x0, domain.y0))
