"""Exceptional-scale arithmetic on top of calibrated percolation models.

A ScaleTable bundles the cluster-volume threshold N with the calibrated
one-arm model pi1, the characteristic-length table L, the density table
theta, and the constant c_theta relating them.  All scale recursions
(psi_N, m_k, m_infinity, q_k, p_hat) are deterministic functions of the
table; sup/inf definitions are discretized on integer radii with
"within one grid step" contracts.

Two pi1 backends exist: a Monte Carlo table with log-log extrapolation,
and a pure power law r^(-5/48) for model arithmetic where lattice noise
would only obscure the recursion behavior.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

ONE_ARM_EXPONENT = Fraction(5, 48)
FOUR_ARM_EXPONENT = Fraction(5, 4)


class SaturationError(ValueError):
    """A scale fell outside the calibrated table range."""


# ---------------------------------------------------------------------------
# exponent recursions
# ---------------------------------------------------------------------------

def delta_k(k: int, alpha=None) -> Fraction:
    """Exponent of the k-th exceptional scale, as an exact rational.

    Base recursion: d_0 = 0, d_{k+1} = 1/2 + (5/96) d_k.
    With a lightning-rate exponent alpha, the recursion becomes
    d_{k+1} = alpha/2 + (41/96) d_k instead.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    d = Fraction(0)
    if alpha is None:
        for _ in range(k):
            d = Fraction(1, 2) + Fraction(5, 96) * d
    else:
        a = Fraction(alpha) if not isinstance(alpha, Fraction) else alpha
        for _ in range(k):
            d = a / 2 + Fraction(41, 96) * d
    return d


def delta_limit(alpha=None) -> Fraction:
    """Fixed point of the exponent recursion: 48/91, or 48 alpha / 55."""
    if alpha is None:
        return Fraction(48, 91)
    a = Fraction(alpha) if not isinstance(alpha, Fraction) else alpha
    return Fraction(48, 55) * a


# ---------------------------------------------------------------------------
# model backends
# ---------------------------------------------------------------------------

@dataclass
class Pi1PowerLaw:
    """pi1(r) = amplitude * r^(-exponent); the model-arithmetic backend."""

    amplitude: float = 1.0
    exponent: float = float(ONE_ARM_EXPONENT)

    def __call__(self, r: float) -> float:
        if r < 1:
            raise ValueError("radius must be >= 1")
        return self.amplitude * float(r) ** (-self.exponent)

    def to_json(self):
        return {"kind": "powerlaw", "amplitude": self.amplitude,
                "exponent": self.exponent}


@dataclass
class Pi1Table:
    """Tabulated one-arm probabilities with log-log linear interpolation.

    Outside the tabulated radii the fitted power-law slope extrapolates.
    The table must be strictly decreasing.
    """

    radii: list
    values: list
    exponent: float = dc_field(default=0.0)  # fitted log-log slope magnitude

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if len(r) < 2 or np.any(np.diff(r) <= 0):
            raise ValueError("radii must be increasing, with >= 2 entries")
        if np.any(np.diff(v) >= 0):
            raise ValueError("pi1 table must be strictly decreasing")
        self._logr = np.log(r)
        self._logv = np.log(v)
        if not self.exponent:
            slope = np.polyfit(self._logr, self._logv, 1)[0]
            self.exponent = float(-slope)

    def __call__(self, r: float) -> float:
        if r < 1:
            raise ValueError("radius must be >= 1")
        lr = math.log(r)
        if lr <= self._logr[0]:
            return float(math.exp(self._logv[0] - self.exponent * (lr - self._logr[0])))
        if lr >= self._logr[-1]:
            return float(math.exp(self._logv[-1] - self.exponent * (lr - self._logr[-1])))
        return float(math.exp(np.interp(lr, self._logr, self._logv)))

    def to_json(self):
        return {"kind": "table", "radii": list(map(float, self.radii)),
                "values": list(map(float, self.values)),
                "exponent": self.exponent}


def pi1_from_json(data):
    if data["kind"] == "powerlaw":
        return Pi1PowerLaw(data["amplitude"], data["exponent"])
    return Pi1Table(data["radii"], data["values"], data["exponent"])


@dataclass
class LTable:
    """Characteristic length vs parameter, strictly decreasing on (1/2, 1].

    Interpolation is linear in (p, log L); inversion is exact on the same
    interpolant.  Querying outside the table raises SaturationError.
    """

    ps: list
    Ls: list

    def __post_init__(self):
        p = np.asarray(self.ps, dtype=float)
        L = np.asarray(self.Ls, dtype=float)
        if np.any(np.diff(p) <= 0):
            raise ValueError("parameters must be increasing")
        if np.any(np.diff(L) >= 0) or np.any(L <= 0):
            raise ValueError("L table must be strictly decreasing and positive")
        self._p = p
        self._logL = np.log(L)

    def __call__(self, p: float) -> float:
        if not (self._p[0] <= p <= self._p[-1]):
            raise SaturationError(f"parameter {p} outside table "
                                  f"[{self._p[0]}, {self._p[-1]}]")
        return float(math.exp(np.interp(p, self._p, self._logL)))

    def inverse(self, L: float) -> float:
        logL = math.log(L)
        if not (self._logL[-1] <= logL <= self._logL[0]):
            raise SaturationError(f"length {L} outside table range "
                                  f"[{math.exp(self._logL[-1])}, {math.exp(self._logL[0])}]")
        return float(np.interp(-logL, -self._logL, self._p))

    @property
    def p_range(self):
        return float(self._p[0]), float(self._p[-1])

    @property
    def L_range(self):
        return float(math.exp(self._logL[-1])), float(math.exp(self._logL[0]))

    def to_json(self):
        return {"ps": list(map(float, self.ps)), "Ls": list(map(float, self.Ls))}


@dataclass
class ThetaTable:
    """Density proxy vs parameter, nondecreasing, anchored at theta(1) = 1.

    Below the first tabulated parameter the value falls linearly to 0 at
    1/2 (the density vanishes at the critical point); this extension is
    a modeling choice recorded here, used only when a freezing time lands
    below the calibrated grid.
    """

    ps: list
    thetas: list

    def __post_init__(self):
        p = np.asarray(self.ps, dtype=float)
        t = np.asarray(self.thetas, dtype=float)
        if np.any(np.diff(p) <= 0):
            raise ValueError("parameters must be increasing")
        if np.any(np.diff(t) < 0):
            raise ValueError("theta table must be nondecreasing")
        self._p = np.concatenate(([0.5], p))
        self._t = np.concatenate(([0.0], t))

    def __call__(self, p: float) -> float:
        if p <= 0.5:
            return 0.0
        if p > 1.0:
            raise ValueError("parameter must be <= 1")
        if p >= self._p[-1]:
            return float(self._t[-1])
        return float(np.interp(p, self._p, self._t))

    def inverse(self, theta: float) -> float:
        """Smallest tabulated parameter with model value >= theta."""
        if not (self._t[0] <= theta <= self._t[-1]):
            raise SaturationError(f"theta {theta} outside table range")
        return float(np.interp(theta, self._t, self._p))

    def to_json(self):
        return {"ps": list(map(float, self.ps)),
                "thetas": list(map(float, self.thetas))}


# ---------------------------------------------------------------------------
# the scale table
# ---------------------------------------------------------------------------

SCHEMA_VERSION = 1


@dataclass
class ScaleTable:
    """Everything the scale recursions need, with provenance."""

    N: int
    c_theta: float
    pi1: object
    L: object
    theta: object
    backend: str = "mc"
    provenance: dict = dc_field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    @classmethod
    def power_law(cls, N: int, c_theta: float = 1.0, amplitude: float = 1.0,
                  L_amplitude: float = 1.0, nu: float = 4.0 / 3.0) -> "ScaleTable":
        """Synthetic backend: pi1 pure power law, L(p) = A |p - 1/2|^(-nu),
        theta(p) = c_theta * pi1(L(p)).  For recursion arithmetic."""
        pi1 = Pi1PowerLaw(amplitude)
        ps, Ls = [], []
        for p in np.round(np.linspace(0.5005, 0.9995, 400), 6):
            L = L_amplitude * (p - 0.5) ** (-nu)
            if L < 1.05:
                break  # keep the table inside the pi1 domain
            ps.append(float(p))
            Ls.append(L)
        thetas = [min(c_theta * pi1(L), 1.0) for L in Ls]
        for i in range(1, len(thetas)):
            if thetas[i] <= thetas[i - 1]:
                thetas[i] = min(thetas[i - 1] * 1.0000001, 1.0 - 1e-12)
        return cls(N, c_theta, pi1, LTable(ps, Ls), ThetaTable(ps, thetas),
                   backend="powerlaw", provenance={"synthetic": True})

    def to_json(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "backend": self.backend,
            "N": self.N,
            "c_theta": self.c_theta,
            "pi1": self.pi1.to_json(),
            "L": self.L.to_json(),
            "theta": self.theta.to_json(),
            "provenance": self.provenance,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ScaleTable":
        return cls(
            N=data["N"],
            c_theta=data["c_theta"],
            pi1=pi1_from_json(data["pi1"]),
            L=LTable(**data["L"]),
            theta=ThetaTable(**data["theta"]),
            backend=data["backend"],
            provenance=data.get("provenance", {}),
            schema_version=data["schema_version"],
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def loads(cls, s: str) -> "ScaleTable":
        return cls.from_json(json.loads(s))

    def with_N(self, N: int) -> "ScaleTable":
        return ScaleTable(N, self.c_theta, self.pi1, self.L, self.theta,
                          self.backend, self.provenance, self.schema_version)


# ---------------------------------------------------------------------------
# scale recursions
# ---------------------------------------------------------------------------

def psi_N(table: ScaleTable, K: float) -> int:
    """Largest integer K' with c_theta * pi1(K') * K^2 >= N.

    The next reference scale after a freezing at scale K: the value of
    the one-arm probability at K' balances the threshold over a volume
    K^2.  Requires the condition to be satisfiable at K' = 1.
    """
    budget = table.c_theta * K * K
    if budget * table.pi1(1) < table.N:
        raise ValueError("scale K too small: no K' satisfies the constraint")
    lo, hi = 1, 2
    while budget * table.pi1(hi) >= table.N:
        hi *= 2
        if hi > 2 ** 62:
            raise OverflowError("psi_N diverged; check the pi1 model")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if budget * table.pi1(mid) >= table.N:
            lo = mid
        else:
            hi = mid
    return lo


def psi_N_closed_form(table: ScaleTable, K: float) -> float:
    """Power-law backend only: K' = (c_theta a K^2 / N)^(1/exponent)."""
    if not isinstance(table.pi1, Pi1PowerLaw):
        raise ValueError("closed form needs the power-law backend")
    base = table.c_theta * table.pi1.amplitude * K * K / table.N
    return base ** (1.0 / table.pi1.exponent)


def m_sequence(table: ScaleTable, k_max: int) -> list:
    """Exceptional scales m_0 = 1, m_{k+1} = ceil(sqrt(N / (c_theta pi1(m_k))))."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    ms = [1]
    for _ in range(k_max):
        prev = ms[-1]
        ms.append(math.ceil(math.sqrt(table.N / (table.c_theta * table.pi1(prev)))))
    return ms


def m1_ratio(table: ScaleTable) -> float:
    """m_1 / sqrt(N); tends to a constant as N grows."""
    return m_sequence(table, 1)[1] / math.sqrt(table.N)


def m_infinity(table: ScaleTable) -> int:
    """Largest integer m with c_theta * pi1(m) * m^2 <= N (the approximate
    fixed point of psi_N)."""
    if table.c_theta * table.pi1(1) > table.N:
        return 0
    lo, hi = 1, 2
    while table.c_theta * table.pi1(hi) * hi * hi <= table.N:
        hi *= 2
        if hi > 2 ** 62:
            raise OverflowError("m_infinity diverged; check the pi1 model")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if table.c_theta * table.pi1(mid) * mid * mid <= table.N:
            lo = mid
        else:
            hi = mid
    return lo


def q_k(table: ScaleTable, k: int) -> float:
    """Parameter at which the characteristic length equals m_k."""
    m = m_sequence(table, max(k, 1))[k]
    return q_of_scale(table, m)


def q_of_scale(table: ScaleTable, m: float) -> float:
    lo, hi = table.L.L_range
    if not (lo <= m <= hi):
        raise SaturationError(f"scale {m} outside the L table range [{lo}, {hi}]")
    return table.L.inverse(m)


def p_hat(table: ScaleTable, p: float) -> float:
    """Solution of L(p)^2 * theta(p_hat) = N; the expected first freezing
    time for the process at reference scale L(p).  Needs L(p)^2 >= N."""
    Lp = table.L(p)
    if Lp * Lp < table.N:
        raise ValueError("p_hat needs L(p)^2 >= N")
    target = table.N / (Lp * Lp)
    return table.theta.inverse(target)


def p_hat_iterates(table: ScaleTable, p: float, k: int) -> list:
    """p, p_hat, p_hat_hat, ...; stops early on saturation."""
    out = [p]
    for _ in range(k):
        try:
            out.append(p_hat(table, out[-1]))
        except (ValueError, SaturationError):
            break
    return out
