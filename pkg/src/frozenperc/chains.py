"""Chains that shadow the frozen process, and deconcentration machinery.

The hole chain alternates a deterministic parameter update (driven by the
scale table) with the explorable hole in the current domain.  Its Markov
surrogate replaces the hole by a fresh draw from the hole-volume law at
the current parameter; since the exponents in the surrogate recursion
compound geometrically, the chain is carried in log space.

Also here: the exact nested coupling of Bernoulli configurations
conditioned on their number of ones (used to prove the abstract
deconcentration bound), the Levy concentration functional, and an
empirical certificate for the sqrt(n) deconcentration inequality.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field
from itertools import combinations

import numpy as np

from .lattice import Domain
from .percolation import hole_in_domain
from .rng import derive_seed
from .scales import SaturationError, ScaleTable, psi_N

GROWTH_EXPONENT = 96.0 / 5.0   # per-step exponent of the log-ratio recursion
LAW_EXPONENT = 48.0 / 5.0      # exponent of the fresh volume factor


# ---------------------------------------------------------------------------
# hole-volume laws
# ---------------------------------------------------------------------------

class ConstantLaw:
    """Degenerate hole-volume law, for exercising the deterministic recursion."""

    def __init__(self, value: float = 1.0):
        self.value = float(value)

    def quantile(self, p: float, u: float) -> float:
        return self.value


class TwoPointLaw:
    """Equally likely pair of values; the lower one for u < 1/2."""

    def __init__(self, lo: float, hi: float):
        self.lo, self.hi = float(lo), float(hi)

    def quantile(self, p: float, u: float) -> float:
        return self.lo if u < 0.5 else self.hi


class EmpiricalHoleLaw:
    """Normalized hole volumes |H(p)| / L(p)^2 sampled on a parameter grid.

    quantile(p, u) interpolates linearly inside the sample set of the
    nearest grid parameter; queries far from the grid fall back to the
    nearest entry (with a warning the first time).
    """

    def __init__(self, grid: dict, provenance: dict | None = None):
        if not grid:
            raise ValueError("empty law grid")
        self.ps = np.array(sorted(grid), dtype=float)
        self.samples = {float(p): np.sort(np.asarray(grid[p], dtype=float))
                        for p in grid}
        self.provenance = provenance or {}
        self._warned = False

    def nearest_p(self, p: float) -> float:
        i = int(np.argmin(np.abs(self.ps - p)))
        return float(self.ps[i])

    def quantile(self, p: float, u: float) -> float:
        q = self.nearest_p(p)
        if abs(q - p) > 1.5 * float(np.diff(self.ps).max() if self.ps.size > 1 else 0.1):
            if not self._warned:
                warnings.warn(f"hole-volume law queried at p={p:.4f}, "
                              f"using nearest grid point {q:.4f}", stacklevel=2)
                self._warned = True
        return float(np.quantile(self.samples[q], u, method="linear"))

    def to_json(self) -> dict:
        return {"ps": [float(p) for p in self.ps],
                "samples": {repr(float(p)): self.samples[float(p)].tolist()
                            for p in self.ps},
                "provenance": self.provenance}

    @classmethod
    def from_json(cls, data: dict) -> "EmpiricalHoleLaw":
        grid = {float(p): v for p, v in data["samples"].items()}
        return cls(grid, data.get("provenance"))


# ---------------------------------------------------------------------------
# the chains
# ---------------------------------------------------------------------------

@dataclass
class ChainStep:
    index: int
    K: float
    log_L: float            # log of the chain's current length value
    p: float | None         # parameter after inverting the L table, if in range
    volume: int | None = None  # |domain| for the domain-carrying chain
    saturated: bool = False
    domain: Domain | None = None


def reference_scales(table: ScaleTable, K0: float, k: int) -> list:
    """K_0, K_1 = psi_N(K_0), ...; stops where psi_N loses its domain."""
    Ks = [float(K0)]
    for _ in range(k):
        try:
            Ks.append(float(psi_N(table, Ks[-1])))
        except (ValueError, OverflowError):
            break
    return Ks


def run_star_star_chain(field, domain0: Domain, table: ScaleTable, k: int,
                        K0: float | None = None):
    """Alternate the deterministic length update with the explorable hole.

    Step: log L(p_{i+1}) = log K_{i+1} + (48/5) log(|D_i| / K_i^2), then
    D_{i+1} = explorable hole of D_i at p_{i+1}.  Stops on an empty hole
    or when a length leaves the calibrated table (saturated flag).
    """
    if (0, 0) not in domain0:
        raise ValueError("origin must belong to the starting domain")
    if K0 is None:
        # the update raises |domain| / K^2 to the 48/5: the reference scale
        # must satisfy K^2 ~ |domain| or the first step is wildly distorted
        K0 = math.sqrt(len(domain0))
    Ks = reference_scales(table, K0, k)
    steps = []
    dom = domain0
    for i in range(min(k, len(Ks) - 1)):
        logL = math.log(Ks[i + 1]) + LAW_EXPONENT * (
            math.log(len(dom)) - 2.0 * math.log(Ks[i]))
        try:
            p_next = table.L.inverse(math.exp(logL))
        except (SaturationError, OverflowError):
            steps.append(ChainStep(i + 1, Ks[i + 1], logL, None,
                                   volume=None, saturated=True))
            break
        hole = hole_in_domain(field, dom, p_next)
        steps.append(ChainStep(i + 1, Ks[i + 1], logL, p_next,
                               volume=hole.volume))
        if hole.empty:
            break
        dom = hole.region
        steps[-1].domain = dom
    return steps


@dataclass
class PtildeResult:
    """Log-space trajectories of the Markov surrogate chain."""

    log_L: np.ndarray       # (paths, k+1) log L values
    Ks: list
    fallback_fraction: float  # law lookups clamped to the grid edge

    def log_ratio(self, step: int) -> np.ndarray:
        return self.log_L[:, step] - math.log(self.Ks[step])


def run_ptilde_chain(law, table: ScaleTable, k: int, L0: float,
                     K0: float | None = None, paths: int = 1,
                     seed: int = 0) -> PtildeResult:
    """Markov surrogate: the hole volume is drawn fresh from its law.

    Recursion on u_i = log(L_i / K_i):
        u_{i+1} = (48/5) log(alpha_i) + (96/5) u_i,
    with alpha_i the law's quantile at the current parameter and a fresh
    uniform.  The parameter is recovered by inverting the L table when
    the current length is in range; otherwise the law is queried at the
    nearest grid edge (counted in fallback_fraction).
    """
    if K0 is None:
        K0 = L0
    Ks = reference_scales(table, K0, k)
    if len(Ks) < k + 1:
        raise SaturationError("reference scales left the pi1 domain")
    rng = np.random.default_rng(derive_seed(seed, 71))
    log_L = np.empty((paths, k + 1), dtype=float)
    log_L[:, 0] = math.log(L0)
    lo_p, hi_p = table.L.p_range
    fallbacks = 0
    lookups = 0
    for j in range(paths):
        u = math.log(L0) - math.log(Ks[0])
        for i in range(k):
            Li = u + math.log(Ks[i])
            try:
                p_i = table.L.inverse(math.exp(min(max(Li, -700.0), 700.0)))
            except (SaturationError, OverflowError):
                p_i = hi_p if Li < math.log(table.L(hi_p)) else lo_p
                fallbacks += 1
            lookups += 1
            alpha = law.quantile(p_i, float(rng.uniform()))
            u = LAW_EXPONENT * math.log(alpha) + GROWTH_EXPONENT * u
            log_L[j, i + 1] = u + math.log(Ks[i + 1])
    return PtildeResult(log_L, Ks, fallbacks / max(lookups, 1))


def ptilde_closed_form(log_alphas, u0: float) -> float:
    """Iterated form of the surrogate recursion, for replay checks:
    u_k = (96/5)^k u_0 + sum_i (48/5) (96/5)^(k-1-i) log alpha_i."""
    k = len(log_alphas)
    out = GROWTH_EXPONENT ** k * u0
    for i, la in enumerate(log_alphas):
        out += LAW_EXPONENT * GROWTH_EXPONENT ** (k - 1 - i) * la
    return out


# ---------------------------------------------------------------------------
# exact monotone coupling of conditioned Bernoulli configurations
# ---------------------------------------------------------------------------

@dataclass
class CouplingPath:
    """Nested 0/1 configurations, one coordinate flipped up per level."""

    n: int
    rates: list
    masks: list  # masks[i] has exactly i bits set; masks[i] subset of masks[i+1]

    def sets(self):
        return [frozenset(j for j in range(self.n) if m >> j & 1)
                for m in self.masks]


def _sigma(rates):
    x = [r / (1.0 - r) for r in rates]

    def weight(mask: int) -> float:
        w = 1.0
        j = 0
        m = mask
        while m:
            if m & 1:
                w *= x[j]
            m >>= 1
            j += 1
        return w

    return weight


def coupling_transition_weights(rates, S: int):
    """Unnormalized transition weights w_j for S -> S + {j}, j not in S.

    w_j = sum over all (|S|+1)-subsets T containing j of
    sigma_T / (|S| + 1 - |S intersect T|); dividing by the level-sum
    Sigma_{|S|+1} makes the rows sum to one exactly.
    """
    n = len(rates)
    i = bin(S).count("1")
    weight = _sigma(rates)
    w = {j: 0.0 for j in range(n) if not (S >> j) & 1}
    level_sum = 0.0
    for combo in combinations(range(n), i + 1):
        T = 0
        for j in combo:
            T |= 1 << j
        sig = weight(T)
        level_sum += sig
        overlap = bin(S & T).count("1")
        denom = i + 1 - overlap
        for j in combo:
            if not (S >> j) & 1:
                w[j] += sig / denom
    return w, level_sum


def monotone_coupling(rates, seed: int = 0) -> CouplingPath:
    """Sample the nested path whose level-i law is the Bernoulli(rates)
    configuration conditioned on having exactly i ones.

    Equal rates use the uniform-flip fast path; general rates use the
    exact transition weights (subset enumeration, so n is capped at 20).
    """
    n = len(rates)
    if n < 1:
        raise ValueError("need at least one coordinate")
    if any(not (0.0 < r < 1.0) for r in rates):
        raise ValueError("rates must lie in (0, 1)")
    rng = np.random.default_rng(derive_seed(seed, 72))
    equal = all(abs(r - rates[0]) < 1e-15 for r in rates)
    masks = [0]
    if equal:
        for i in range(n):
            zeros = [j for j in range(n) if not (masks[-1] >> j) & 1]
            j = zeros[int(rng.integers(len(zeros)))]
            masks.append(masks[-1] | (1 << j))
        return CouplingPath(n, list(rates), masks)
    if n > 20:
        raise ValueError("general-rate coupling is capped at n = 20; "
                         "equal rates have no cap")
    for i in range(n):
        w, _ = coupling_transition_weights(rates, masks[-1])
        js = sorted(w)
        probs = np.array([w[j] for j in js], dtype=float)
        probs /= probs.sum()
        j = js[int(rng.choice(len(js), p=probs))]
        masks.append(masks[-1] | (1 << j))
    return CouplingPath(n, list(rates), masks)


def coupling_level_laws(rates):
    """Exact level-by-level laws of the constructed path (for n <= 12).

    Returns (claimed, constructed): two lists of dicts mask -> probability,
    where claimed[i] is the conditional Bernoulli law given i ones and
    constructed[i] comes from multiplying the transition rows.
    """
    n = len(rates)
    if n > 12:
        raise ValueError("exact level laws are limited to n = 12")
    weight = _sigma(rates)
    claimed = []
    for i in range(n + 1):
        sigs = {}
        for combo in combinations(range(n), i):
            T = 0
            for j in combo:
                T |= 1 << j
            sigs[T] = weight(T)
        Z = sum(sigs.values())
        claimed.append({T: s / Z for T, s in sigs.items()})
    constructed = [{0: 1.0}]
    for i in range(n):
        nxt: dict = {}
        for S, pS in constructed[-1].items():
            w, level_sum = coupling_transition_weights(rates, S)
            for j, wj in w.items():
                T = S | (1 << j)
                nxt[T] = nxt.get(T, 0.0) + pS * wj / level_sum
        constructed.append(nxt)
    return claimed, constructed


# ---------------------------------------------------------------------------
# concentration functionals
# ---------------------------------------------------------------------------

def levy_concentration(samples, lam: float, mode: str = "additive",
                       weights=None) -> float:
    """Exact sup over window positions of the empirical window mass.

    additive: sup_x P(X in [x, x + lam]), lam >= 0;
    multiplicative: sup_y P(X in [y, lam * y)), lam > 1, X > 0 (the open
    left end is approached by y from below, so the closed-left window on
    sample points realizes the sup).
    """
    a = np.asarray(samples, dtype=float)
    if a.size == 0:
        raise ValueError("empty sample")
    if weights is None:
        w = np.full(a.size, 1.0 / a.size)
    else:
        w = np.asarray(weights, dtype=float)
        w = w / w.sum()
    order = np.argsort(a, kind="stable")
    a, w = a[order], w[order]
    cw = np.concatenate(([0.0], np.cumsum(w)))
    if mode == "additive":
        if lam < 0:
            raise ValueError("additive window width must be >= 0")
        hi = np.searchsorted(a, a + lam, side="right")
        lo = np.arange(a.size)
        return float(np.max(cw[hi] - cw[lo]))
    if mode == "multiplicative":
        if lam <= 1:
            raise ValueError("multiplicative window factor must be > 1")
        if np.any(a <= 0):
            raise ValueError("multiplicative mode needs positive samples")
        hi = np.searchsorted(a, lam * a, side="left")
        lo = np.arange(a.size)
        return float(np.max(cw[hi] - cw[lo]))
    raise ValueError("mode must be 'additive' or 'multiplicative'")


class CertificateRefused(RuntimeError):
    """The monotone-gradient hypothesis failed a spot check."""


@dataclass
class DeconcentrationCertificate:
    estimate: float
    bound: float
    n: int
    interval: tuple
    trials: int
    passed: bool


def deconcentration_certificate(f, rates, interval, trials: int = 20000,
                                c: float = 2.0, seed: int = 0,
                                spot_checks: int = 200) -> DeconcentrationCertificate:
    """Empirical check of P(f(Y) in I) <= c n^(-1/2) (|I| + 1).

    f maps a 0/1 numpy array to a real; the hypothesis is that flipping
    any coordinate up raises f by at least 1, spot-checked on random
    (configuration, coordinate) pairs before any estimate is produced.
    """
    rates = np.asarray(rates, dtype=float)
    n = rates.size
    if np.any(rates <= 0) or np.any(rates >= 1):
        raise ValueError("rates must lie strictly inside (0, 1)")
    lo, hi = interval
    if not lo <= hi:
        raise ValueError("empty interval")
    rng = np.random.default_rng(derive_seed(seed, 73))
    for _ in range(spot_checks):
        omega = (rng.uniform(size=n) < rates).astype(np.int8)
        i = int(rng.integers(n))
        up = omega.copy()
        up[i] = 1
        down = omega.copy()
        down[i] = 0
        if f(up) - f(down) < 1.0 - 1e-12:
            raise CertificateRefused(
                f"gradient below 1 at coordinate {i}: "
                f"{f(up) - f(down):.6g}")
    hits = 0
    for _ in range(trials):
        omega = (rng.uniform(size=n) < rates).astype(np.int8)
        v = f(omega)
        if lo <= v <= hi:
            hits += 1
    est = hits / trials
    bound = c / math.sqrt(n) * ((hi - lo) + 1.0)
    return DeconcentrationCertificate(est, bound, n, (lo, hi), trials,
                                      est <= bound)
