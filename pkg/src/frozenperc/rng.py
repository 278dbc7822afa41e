"""Counter-based randomness: the shared activation-time field.

Every vertex (x, y) of the triangular lattice gets an activation time
tau(x, y) in (0, 1), computed as a pure function of (seed, x, y) by a
SplitMix64-style avalanche.  No state is stored, so arbitrary windows of
the plane are addressable lazily, results are bit-reproducible across
runs and platforms, and independent replicas are obtained by deriving
child seeds.  The same field, queried at different thresholds p, couples
the percolation configurations for all parameters.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """One SplitMix64 finalization round on a 64-bit integer."""
    z = (z + _GAMMA) & MASK64
    z ^= z >> 30
    z = (z * _MIX1) & MASK64
    z ^= z >> 27
    z = (z * _MIX2) & MASK64
    z ^= z >> 31
    return z


def tau_bits(seed: int, x: int, y: int) -> int:
    """64-bit hash of (seed, x, y); coordinates may be negative."""
    h = mix64(seed & MASK64)
    h = mix64(h ^ (x & MASK64))
    h = mix64(h ^ (y & MASK64))
    return h


def tau_value(seed: int, x: int, y: int) -> float:
    """Activation time in (0, 1), exclusive at both ends."""
    return (float(tau_bits(seed, x, y) >> 11) + 0.5) * 2.0**-53


def child_seed(master: int, index: int) -> int:
    """Derived seed for replica `index`; replicas are decorrelated."""
    return mix64(mix64(master & MASK64) ^ (index & MASK64))


def derive_seed(master: int, *parts: int) -> int:
    """Fold integer tags into a seed; used to give estimators disjoint streams."""
    h = mix64(master & MASK64)
    for part in parts:
        h = mix64(h ^ (int(part) & MASK64))
    return h


def float_bits(x: float) -> int:
    """Bit pattern of a float, for folding real parameters into seed streams."""
    return int(np.float64(x).view(np.uint64))


def seed_array(master: int, stream: int, n: int) -> np.ndarray:
    """n replica seeds for one estimator stream, as uint64."""
    h = np.uint64(mix64(mix64(master & MASK64) ^ (stream & MASK64)))
    idx = np.arange(n, dtype=np.uint64)
    return _mix64_u64(h ^ idx)


def tau_matrix(master: int, runs: int, nv: int) -> np.ndarray:
    """Activation times for seeded replica runs on nv abstract vertices.

    Row r equals tau_grid(child_seed(master, r), 0, 0, nv, 1): replica r
    uses the derived child seed, vertices are addressed as (v, 0).
    """
    children = _mix64_u64(np.uint64(mix64(master & MASK64))
                          ^ np.arange(runs, dtype=np.uint64))
    h0 = _mix64_u64(children)
    hx = _mix64_u64(h0[:, np.newaxis]
                    ^ np.arange(nv, dtype=np.uint64)[np.newaxis, :])
    bits = _mix64_u64(hx ^ np.uint64(0))
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def _mix64_u64(z: np.ndarray) -> np.ndarray:
    z = z + np.uint64(_GAMMA)
    z ^= z >> np.uint64(30)
    z *= np.uint64(_MIX1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_MIX2)
    z ^= z >> np.uint64(31)
    return z


def tau_grid(seed: int, x0: int, y0: int, w: int, h: int) -> np.ndarray:
    """Vectorized tau values for the window [x0, x0+w) x [y0, y0+h).

    Returns a float64 array of shape (h, w) indexed [y - y0, x - x0],
    identical entry by entry to `tau_value`.
    """
    xs = (np.arange(x0, x0 + w, dtype=np.int64)).astype(np.uint64)
    ys = (np.arange(y0, y0 + h, dtype=np.int64)).astype(np.uint64)
    h0 = np.uint64(mix64(seed & MASK64))
    hx = _mix64_u64(h0 ^ xs)
    bits = _mix64_u64(hx[np.newaxis, :] ^ ys[:, np.newaxis])
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


class TauField:
    """The coupled field of activation times, keyed by a 64-bit seed.

    A vertex is p-black when tau <= p.  Distinct vertices get distinct
    tau values up to float collisions (~2^-53 per pair); whenever an
    ordering is needed, ties are broken lexicographically by (tau, x, y).
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64

    def tau(self, x: int, y: int) -> float:
        return tau_value(self.seed, x, y)

    def grid(self, x0: int, y0: int, w: int, h: int) -> np.ndarray:
        return tau_grid(self.seed, x0, y0, w, h)

    def black_mask(self, x0: int, y0: int, w: int, h: int, p: float) -> np.ndarray:
        """Boolean (h, w) array: True where tau <= p."""
        return self.grid(x0, y0, w, h) <= p

    def child(self, index: int) -> "TauField":
        return TauField(child_seed(self.seed, index))

    def __repr__(self):
        return f"TauField(seed={self.seed:#x})"


class OverrideField:
    """A tau field with values replaced on a finite set of vertices.

    Used to re-randomize a region while keeping the rest of the field
    fixed (e.g. to check that a stopping set does not depend on the
    configuration inside itself).
    """

    def __init__(self, base, overrides: dict):
        self.base = base
        self.seed = base.seed
        self.overrides = {(int(x), int(y)): float(t) for (x, y), t in overrides.items()}

    def tau(self, x: int, y: int) -> float:
        return self.overrides.get((x, y), self.base.tau(x, y))

    def grid(self, x0: int, y0: int, w: int, h: int) -> np.ndarray:
        g = self.base.grid(x0, y0, w, h).copy()
        for (x, y), t in self.overrides.items():
            if x0 <= x < x0 + w and y0 <= y < y0 + h:
                g[y - y0, x - x0] = t
        return g

    def black_mask(self, x0: int, y0: int, w: int, h: int, p: float) -> np.ndarray:
        return self.grid(x0, y0, w, h) <= p
