"""Experiment runner: calibration, the measurable experiments, persistence.

Conventions shared by every experiment:
  * replica r of a run with master seed s uses the derived seed
    child_seed(s, r); results do not depend on the thread count because
    rows are keyed by replica index and sorted before aggregation;
  * CSV is the canonical result format, one row per replica, with '#'
    header lines carrying the config hash, the package version, and the
    calibration provenance;
  * experiments refuse to run against a calibration whose schema version
    is older than theirs.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import __version__
from . import _kernels as K
from .chains import EmpiricalHoleLaw, levy_concentration, run_ptilde_chain
from .frozen import run_frozen, surrounding_frozen_count
from .lattice import Domain
from .percolation import (
    estimate_arm,
    estimate_characteristic_length,
    estimate_theta,
    label_clusters,
    one_arm_profile,
)
from .rng import TauField, child_seed, derive_seed, float_bits, seed_array
from .scales import (
    LTable,
    Pi1Table,
    SCHEMA_VERSION,
    ScaleTable,
    ThetaTable,
)

DEFAULT_P_GRID = (0.55, 0.57, 0.60, 0.63, 0.66, 0.70, 0.74, 0.78,
                  0.82, 0.86, 0.90, 0.94)
DEFAULT_LAW_GRID = (0.60, 0.63, 0.66)
PI1_RADII = (1, 2, 4, 8, 16, 32, 64, 128, 256)


def cache_dir() -> Path:
    env = os.environ.get("FROZEN_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "frozenperc"


# ---------------------------------------------------------------------------
# config and results
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    experiment: str
    seed: int = 1
    replicas: int = 100
    threads: int = 1
    params: dict = dc_field(default_factory=dict)

    def canonical(self) -> str:
        return json.dumps(
            {"experiment": self.experiment, "seed": self.seed,
             "replicas": self.replicas, "params": self.params},
            sort_keys=True)

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]


@dataclass
class ResultRecord:
    experiment: str
    config_hash: str
    columns: list
    rows: list                  # list of tuples, sorted by first column
    summary: dict
    calibration_provenance: dict = dc_field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# experiment: {self.experiment}\n")
        buf.write(f"# config_hash: {self.config_hash}\n")
        buf.write(f"# version: frozenperc-{__version__}\n")
        buf.write("# calibration: "
                  + json.dumps(self.calibration_provenance, sort_keys=True) + "\n")
        buf.write("# summary: " + json.dumps(self.summary, sort_keys=True) + "\n")
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(_fmt(v) for v in row) + "\n")
        return buf.getvalue()

    def write(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv())
        return path


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def run_replicas(worker, replicas: int, threads: int = 1) -> list:
    """Evaluate worker(replica_index) for each replica; output order is
    by replica index regardless of scheduling."""
    if threads <= 1:
        results = [worker(r) for r in range(replicas)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(worker, range(replicas)))
    return results


# ---------------------------------------------------------------------------
# calibration
# ---------------------------------------------------------------------------

def _theta_samples_for(R: int, budget: int) -> int:
    # keep the per-point cost roughly flat: floods visit O(R^2) sites
    return int(max(200, min(budget, budget * (120.0 / max(R, 1)) ** 2)))


def calibrate(seed: int = 1, p_grid=DEFAULT_P_GRID, L_samples: int = 2000,
              theta_budget: int = 2000, pi1_samples: int = 20000,
              window_factor: float = 8.0, progress=None) -> ScaleTable:
    """Build the calibrated scale table: length, density, one-arm, c_theta.

    Monotonicity of the length table over the parameter grid is enforced
    by isotonic (pool-adjacent-violators) smoothing of log L before
    interpolation; raw Monte Carlo noise would otherwise break the
    invertibility the scale recursions rely on.
    """
    field = TauField(seed)
    ps = sorted(p_grid)
    Ls, thetas = [], []
    for p in ps:
        est = estimate_characteristic_length(field, p, samples=L_samples)
        Ls.append(max(est.value, 1.01))
        if progress:
            progress(f"L({p}) = {est.value:.2f}")
    logL = _pava_decreasing(np.log(np.asarray(Ls)))
    Ls = list(np.exp(logL))
    # strictness for invertibility
    for i in range(1, len(Ls)):
        if Ls[i] >= Ls[i - 1]:
            Ls[i] = Ls[i - 1] * (1 - 1e-9)
    for p, L in zip(ps, Ls):
        R = max(1, int(round(window_factor * L)))
        n = _theta_samples_for(R, theta_budget)
        est = estimate_theta(field, p, window_factor=window_factor,
                             samples=n, L=L)
        thetas.append(est.value)
        if progress:
            progress(f"theta({p}) = {est.value:.4f} (R={R}, n={n})")
    thetas = list(np.maximum.accumulate(np.asarray(thetas)))
    for i in range(1, len(thetas)):
        if thetas[i] <= thetas[i - 1]:
            thetas[i] = min(thetas[i - 1] + 1e-9, 1.0)
    # anchor the fully-occupied end
    ps_theta = ps + [1.0]
    thetas = thetas + [1.0]

    profile = one_arm_profile(field, PI1_RADII, p=0.5, samples=pi1_samples)
    radii = sorted(profile)
    values = [profile[r].value for r in radii]
    values = list(np.exp(_pava_decreasing(np.log(np.asarray(values)))))
    for i in range(1, len(values)):
        if values[i] >= values[i - 1]:
            values[i] = values[i - 1] * (1 - 1e-9)
    pi1 = Pi1Table(radii, values)
    if progress:
        progress(f"pi1 exponent: {pi1.exponent:.4f}")

    Lmodel = LTable(ps, Ls)
    theta_model = ThetaTable(ps_theta, thetas)
    ratios = [theta_model(p) / pi1(Lmodel(p)) for p in ps]
    c_theta = float(np.median(ratios))
    provenance = {"seed": seed, "L_samples": L_samples,
                  "theta_budget": theta_budget, "pi1_samples": pi1_samples,
                  "p_grid": list(ps), "window_factor": window_factor}
    return ScaleTable(N=1, c_theta=c_theta, pi1=pi1, L=Lmodel,
                      theta=theta_model, backend="mc", provenance=provenance)


def _pava_decreasing(y: np.ndarray) -> np.ndarray:
    """Pool-adjacent-violators projection onto nonincreasing sequences."""
    neg = -np.asarray(y, dtype=float)
    vals, wts = [], []
    for v in neg:
        vals.append(v)
        wts.append(1.0)
        while len(vals) > 1 and vals[-2] > vals[-1]:
            v2, w2 = vals.pop(), wts.pop()
            v1, w1 = vals.pop(), wts.pop()
            vals.append((v1 * w1 + v2 * w2) / (w1 + w2))
            wts.append(w1 + w2)
    out = []
    for v, w in zip(vals, wts):
        out.extend([v] * int(round(w)))
    return -np.asarray(out)


def hole_volume_batch(seed: int, p: float, R: int, samples: int,
                      stream: int = 21) -> np.ndarray:
    """Raw per-replica hole-volume codes from the batched kernel."""
    seeds = seed_array(seed, derive_seed(stream, float_bits(p), R), samples)
    return K.hole_volumes(seeds, p, R)


def sample_hole_law(seed: int, table: ScaleTable, p_grid=DEFAULT_LAW_GRID,
                    samples_per_p: int = 2000, window_factor: float = 4.0,
                    max_attempt_factor: int = 4000, threads: int = 1,
                    progress=None) -> EmpiricalHoleLaw:
    """Empirical law of |hole| / L(p)^2 over nonempty holes, per grid point.

    The law's support is (0, inf): replicas where the origin sits in the
    removed set (the dominant outcome at these parameters, since the
    density is far from zero) carry no hole and are rejected, as are the
    rare replicas with no surrounding cluster.  Acceptance rates land in
    the provenance block.  Results do not depend on the thread count.
    """
    def one_p(p):
        L = table.L(p)
        R = max(4, int(round(window_factor * L)))
        vals = []
        attempts = 0
        batch = max(2000, samples_per_p)
        stream = 0
        while len(vals) < samples_per_p and attempts < max_attempt_factor * samples_per_p:
            codes = hole_volume_batch(derive_seed(seed, 21, float_bits(p), stream),
                                      p, R, batch)
            stream += 1
            attempts += batch
            pos = codes[codes > 0]
            vals.extend((pos / (L * L)).tolist())
            # adapt the batch size to the observed acceptance rate
            rate = max(len(vals) / attempts, 1e-4)
            batch = int(min(300000, max(2000, 1.3 * (samples_per_p - len(vals)) / rate)))
        vals = vals[:samples_per_p]
        if not vals:
            raise RuntimeError(f"no nonempty holes found at p={p}")
        if progress:
            progress(f"law({p}): {len(vals)} holes from {attempts} fields, "
                     f"median {np.median(vals):.4f}")
        return float(p), vals, len(vals) / attempts

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one_p, p_grid))
    else:
        results = [one_p(p) for p in p_grid]
    grid = {p: vals for p, vals, _ in results}
    rates = {p: rate for p, _, rate in results}
    return EmpiricalHoleLaw(grid, provenance={"seed": seed,
                                              "samples_per_p": samples_per_p,
                                              "window_factor": window_factor,
                                              "acceptance_rates": rates})


def save_calibration(table: ScaleTable, law: EmpiricalHoleLaw | None,
                     path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    blob = {"schema_version": SCHEMA_VERSION, "table": table.to_json(),
            "law": law.to_json() if law is not None else None}
    path.write_text(json.dumps(blob, sort_keys=True))
    return path


def load_calibration(path) -> tuple[ScaleTable, EmpiricalHoleLaw | None]:
    blob = json.loads(Path(path).read_text())
    if blob.get("schema_version", 0) < SCHEMA_VERSION:
        raise StaleCalibrationError(
            f"calibration schema {blob.get('schema_version')} older than "
            f"required {SCHEMA_VERSION}; re-run calibrate")
    table = ScaleTable.from_json(blob["table"])
    law = EmpiricalHoleLaw.from_json(blob["law"]) if blob.get("law") else None
    return table, law


class StaleCalibrationError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

def exp_theta_over_pi(cfg: ExperimentConfig, table: ScaleTable) -> ResultRecord:
    """Ratio theta(p) / pi1(L(p)) over a parameter grid; its stability is
    the desk-scale stand-in for the ratio having a limit."""
    ps = cfg.params.get("p_grid", (0.55, 0.60, 0.65, 0.70))
    samples = cfg.params.get("samples", 10000)
    wf = cfg.params.get("window_factor", 8.0)
    field = TauField(cfg.seed)
    rows = []
    for i, p in enumerate(ps):
        L = estimate_characteristic_length(field, p, samples=min(samples, 4000)).value
        th = estimate_theta(field, p, window_factor=wf, samples=samples, L=L)
        arm = estimate_arm(field, "b", 0, max(1, int(round(L))), 0.5,
                           samples=samples)
        ratio = th.value / arm.value
        se = ratio * math.sqrt((th.stderr / th.value) ** 2
                               + (arm.stderr / arm.value) ** 2)
        rows.append((i, p, L, th.value, arm.value, ratio, se))
    ratios = [r[5] for r in rows]
    summary = {"max_over_min": max(ratios) / min(ratios),
               "median_ratio": float(np.median(ratios))}
    return ResultRecord("theta-over-pi", cfg.config_hash(),
                        ["row", "p", "L", "theta", "pi1_at_L", "ratio", "se"],
                        rows, summary, table.provenance)


def exp_kesten_product(cfg: ExperimentConfig, table: ScaleTable) -> ResultRecord:
    """|p - 1/2| L(p)^2 pi4(L(p)) over a grid (4-arm via the pivotality
    proxy); near-constancy is the desk analogue of the scaling relation."""
    ps = cfg.params.get("p_grid", (0.55, 0.60, 0.65, 0.70))
    samples = cfg.params.get("samples", 30000)
    field = TauField(cfg.seed)
    rows = []
    for i, p in enumerate(ps):
        L = estimate_characteristic_length(field, p, samples=min(samples, 4000)).value
        n = max(2, int(round(L)))
        piv = estimate_arm(field, "bwbw", 0, n, 0.5, samples=samples)
        prod = abs(p - 0.5) * L * L * piv.value
        rows.append((i, p, L, n, piv.value, piv.stderr, prod))
    prods = [r[6] for r in rows]
    summary = {"max_over_min": max(prods) / min(prods),
               "all_finite_positive": bool(all(0 < x < math.inf for x in prods))}
    return ResultRecord("kesten-product", cfg.config_hash(),
                        ["row", "p", "L", "pivot_radius", "pi4", "pi4_se", "product"],
                        rows, summary, table.provenance)


def exp_largest_cluster(cfg: ExperimentConfig, table: ScaleTable) -> ResultRecord:
    """Largest-cluster volume law in a box: |C_max| / (theta |Box|)
    concentrates near 1 once the box dwarfs the characteristic length."""
    n = cfg.params.get("n", 128)
    L_target = cfg.params.get("L_target", 8.0)
    eps = cfg.params.get("eps", 0.2)
    p = table.L.inverse(L_target)
    theta = table.theta(p)
    dom = Domain.ball(n)
    volume = len(dom)

    def worker(r):
        f = TauField(child_seed(cfg.seed, r))
        lab = label_clusters(f, dom, p)
        tops = lab.largest(2)
        c1 = tops[0][1] if tops else 0
        c2 = tops[1][1] if len(tops) > 1 else 0
        ring = _has_circuit_in_annulus(lab, tops[0][0], n // 8, n // 4) if tops else False
        return (r, c1, c2, int(ring))

    rows = run_replicas(worker, cfg.replicas, cfg.threads)
    denom = theta * volume
    ok = sum(1 for (_, c1, c2, _) in rows
             if abs(c1 / denom - 1.0) < eps and c2 < eps * denom)
    circ = sum(ring for (_, _, _, ring) in rows)
    out_rows = [(r, c1, c1 / denom, c2, c2 / denom, ring)
                for (r, c1, c2, ring) in rows]
    summary = {"p": p, "theta": theta, "volume": volume,
               "fraction_within_eps": ok / cfg.replicas,
               "fraction_with_circuit": circ / cfg.replicas}
    return ResultRecord("largest-cluster", cfg.config_hash(),
                        ["replica", "largest", "largest_ratio",
                         "second", "second_ratio", "circuit"],
                        out_rows, summary, table.provenance)


def _has_circuit_in_annulus(lab, cluster_id, m, n) -> bool:
    """Does the cluster contain a circuit around the origin inside Ann_{m,n}?

    Tested by removing the cluster's annulus part: if the origin's free
    component is then confined to Ball_n, the cluster separates it."""
    from scipy import ndimage
    from .lattice import TRI_STRUCTURE
    dom = lab.domain
    H, W = dom.mask.shape
    yy, xx = np.mgrid[0:H, 0:W]
    xs, ys = xx + dom.x0, yy + dom.y0
    d = np.maximum(np.abs(xs), np.abs(ys))
    ring = (lab.labels == cluster_id) & (d > m) & (d <= n)
    free = ~ring
    labeled, _ = ndimage.label(free, structure=TRI_STRUCTURE)
    comp = labeled == labeled[-dom.y0, -dom.x0]
    return bool(not (comp & (d > n)).any())


def exp_freezing_bracket(cfg: ExperimentConfig, table: ScaleTable) -> ResultRecord:
    """Normalized first freezing time: theta(t1) |Box| / N, against the
    prediction that the first cluster freezes when the dominant-cluster
    volume theta(t) |Box| passes N."""
    side = cfg.params.get("side", 128)
    N = cfg.params.get("N", 2000)
    lo = cfg.params.get("lo", 0.7)
    hi = cfg.params.get("hi", 1.3)
    half = side // 2
    dom = Domain(np.ones((side, side), dtype=bool), (-half, -half))
    volume = len(dom)

    def worker(r):
        f = TauField(child_seed(cfg.seed, r))
        _, trace = run_frozen(f, dom, N)
        if not trace.events:
            return (r, math.nan, math.nan, 0)
        t1 = trace.events[0].time
        stat = table.theta(t1) * volume / N
        return (r, t1, stat, 1)

    rows = run_replicas(worker, cfg.replicas, cfg.threads)
    stats = [s for (_, _, s, fr) in rows if fr]
    excluded = cfg.replicas - len(stats)
    inside = sum(1 for s in stats if lo <= s <= hi)
    summary = {"N": N, "side": side, "volume": volume,
               "excluded_no_freezing": excluded,
               "fraction_inside": inside / len(stats) if stats else 0.0,
               "median_stat": float(np.median(stats)) if stats else math.nan,
               "median_t1": float(np.median([t for (_, t, _, fr) in rows if fr]))
               if stats else math.nan}
    return ResultRecord("freezing-bracket", cfg.config_hash(),
                        ["replica", "t1", "normalized_stat", "froze"],
                        rows, summary, table.provenance)


def exp_deconcentration_final(cfg: ExperimentConfig) -> ResultRecord:
    """Paired independent final clusters of the origin across an N grid:
    the spread of |C(0)| at time 1 (ratio of the pair), plus freezing
    frequency and surrounding-cluster counts."""
    grid = cfg.params.get("grid", ((50, 128), (200, 256), (800, 512)))
    pairs = cfg.params.get("pairs", 150)
    rows = []
    summary_rows = {}
    for (N, side) in grid:
        half = side // 2
        dom = Domain(np.ones((side, side), dtype=bool), (-half, -half))

        def worker(r, N=N, dom=dom):
            fa = TauField(derive_seed(cfg.seed, 31, N, 2 * r))
            fb = TauField(derive_seed(cfg.seed, 31, N, 2 * r + 1))
            _, ta = run_frozen(fa, dom, N)
            _, tb = run_frozen(fb, dom, N)
            va, vb = ta.final_origin_volume, tb.final_origin_volume
            ratio = max(va, vb) / min(va, vb) if min(va, vb) > 0 else math.nan
            return (N, side, r, va, vb, ratio,
                    int(ta.origin_frozen_at_one) + int(tb.origin_frozen_at_one),
                    surrounding_frozen_count(ta) + surrounding_frozen_count(tb))

        out = run_replicas(worker, pairs, cfg.threads)
        rows.extend(out)
        ratios = [r[5] for r in out if not math.isnan(r[5])]
        frozen_frac = sum(r[6] for r in out) / (2 * pairs)
        surr = [r[7] for r in out]
        summary_rows[str(N)] = {
            "median_ratio": float(np.median(ratios)) if ratios else math.nan,
            "q1": float(np.percentile(ratios, 25)) if ratios else math.nan,
            "q3": float(np.percentile(ratios, 75)) if ratios else math.nan,
            "degenerate_pairs": pairs - len(ratios),
            "origin_frozen_frac": frozen_frac,
            "mean_surrounding": float(np.mean(surr)),
        }
    medians = [summary_rows[str(N)]["median_ratio"] for (N, _) in grid]
    summary = {"per_N": summary_rows,
               "medians": medians,
               "nondecreasing": bool(all(a <= b + 1e-12
                                         for a, b in zip(medians, medians[1:])))}
    return ResultRecord("deconcentration-final", cfg.config_hash(),
                        ["N", "side", "pair", "vol_a", "vol_b", "ratio",
                         "frozen_count", "surrounding_count"],
                        rows, summary)


def exp_two_parameter(cfg: ExperimentConfig, table: ScaleTable) -> ResultRecord:
    """P(origin reaches far at p' but not distance n at p) on a coupled
    field, compared with the shape (p'-p)/(p-1/2) * theta(p)."""
    grid = cfg.params.get("grid")
    if grid is None:
        grid = [(0.60, 0.62), (0.60, 0.65), (0.65, 0.67), (0.65, 0.70)]
    samples = cfg.params.get("samples", 20000)
    field = TauField(cfg.seed)
    rows = []
    for i, (p, pp) in enumerate(grid):
        if not (0.5 < p < pp):
            raise ValueError("need 1/2 < p < p'")
        L = table.L(p)
        n = max(2, int(round(L)))
        R = max(n + 1, int(round(8 * L)))
        seeds = seed_array(field.seed, derive_seed(41, float_bits(p),
                                                   float_bits(pp)), samples)
        far = K.theta_hits(seeds, pp, R)
        near = K.theta_hits(seeds, p, n)
        hits = int(((far == 1) & (near == 0)).sum())
        prob = hits / samples
        shape = (pp - p) / (p - 0.5) * table.theta(p)
        rows.append((i, p, pp, n, R, prob,
                     math.sqrt(max(prob * (1 - prob), 1e-300) / samples),
                     shape, prob / shape if shape > 0 else math.nan))
    cs = [r[8] for r in rows if not math.isnan(r[8])]
    summary = {"fitted_c_median": float(np.median(cs)),
               "fit_residual_spread": float(max(cs) / min(cs)) if cs else math.nan}
    return ResultRecord("two-parameter", cfg.config_hash(),
                        ["row", "p", "p_prime", "n", "R", "prob", "se",
                         "shape", "c_hat"],
                        rows, summary, table.provenance)


def exp_chain_deconcentration(cfg: ExperimentConfig, table: ScaleTable,
                              law: EmpiricalHoleLaw) -> ResultRecord:
    """Multiplicative concentration of the surrogate chain at each depth:
    sup_y P(L_k in (y, 2y)), expected to fall as the depth grows."""
    k = cfg.params.get("k", 4)
    paths = cfg.params.get("paths", 10000)
    lam = cfg.params.get("lam", 2.0)
    N = cfg.params.get("N", table.N if table.N > 1 else 4000)
    work = table.with_N(N)
    from .scales import m_infinity, m_sequence
    minf = m_infinity(work)
    K0 = cfg.params.get("K0", 0.0) or 0.8 * minf
    L0 = cfg.params.get("L0", 0.0) or 0.5 * K0
    res = run_ptilde_chain(law, work, k, L0=L0, K0=K0, paths=paths,
                           seed=cfg.seed)
    rows = []
    sups = []
    for step in range(1, k + 1):
        # sup_y P(L in (y, lam y)) = widest log-window mass of width log lam
        logs = res.log_L[:, step]
        sup = levy_concentration(logs, math.log(lam), "additive")
        sups.append(sup)
        rows.append((step, float(np.median(logs)), float(np.std(logs)), sup))
    summary = {"N": N, "K0": K0, "L0": L0, "m_infinity": minf,
               "sups": sups, "fallback_fraction": res.fallback_fraction,
               "nonincreasing": bool(all(a >= b - 1e-12
                                         for a, b in zip(sups, sups[1:])))}
    return ResultRecord("chain-deconcentration", cfg.config_hash(),
                        ["step", "median_logL", "sd_logL", "sup_window_mass"],
                        rows, summary, table.provenance)


EXPERIMENTS = {
    "theta-over-pi": (exp_theta_over_pi, True, False),
    "kesten-product": (exp_kesten_product, True, False),
    "largest-cluster": (exp_largest_cluster, True, False),
    "freezing-bracket": (exp_freezing_bracket, True, False),
    "deconcentration-final": (exp_deconcentration_final, False, False),
    "two-parameter": (exp_two_parameter, True, False),
    "chain-deconcentration": (exp_chain_deconcentration, True, True),
}


def run_experiment(name: str, cfg: ExperimentConfig,
                   table: ScaleTable | None = None,
                   law: EmpiricalHoleLaw | None = None) -> ResultRecord:
    if name not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {name!r}; "
                         f"choose from {sorted(EXPERIMENTS)}")
    fn, needs_table, needs_law = EXPERIMENTS[name]
    if needs_table:
        if table is None:
            raise StaleCalibrationError("experiment needs a calibration table")
        if table.schema_version < SCHEMA_VERSION:
            raise StaleCalibrationError(
                f"calibration schema {table.schema_version} is older than "
                f"required {SCHEMA_VERSION}")
    if needs_law and law is None:
        raise StaleCalibrationError("experiment needs a hole-volume law table")
    if not needs_table:
        return fn(cfg)
    if needs_law:
        return fn(cfg, table, law)
    return fn(cfg, table)
