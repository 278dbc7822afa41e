"""Command line interface.

Exit codes: 0 success, 1 usage error, 2 runtime error, 3 a requested
check failed (coupling --check or an experiment's pinned pass/fail).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .chains import coupling_level_laws, monotone_coupling
from .frozen import run_frozen
from .harness import (
    EXPERIMENTS,
    ExperimentConfig,
    StaleCalibrationError,
    cache_dir,
    calibrate,
    load_calibration,
    run_experiment,
    sample_hole_law,
    save_calibration,
)
from .lattice import Domain
from .rng import TauField
from .scales import (
    ScaleTable,
    delta_k,
    delta_limit,
    m_infinity,
    m_sequence,
    q_of_scale,
    SaturationError,
)

USAGE_EXIT, RUNTIME_EXIT, CHECK_EXIT = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(USAGE_EXIT)


def build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=1)
    common.add_argument("--replicas", type=int, default=100)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", type=str, default=None)
    common.add_argument("--config", type=str, default=None,
                        help="JSON file with extra experiment parameters")

    parser = _Parser(prog="frozenperc",
                     description="volume-frozen percolation toolkit",
                     parents=[common])
    parser.add_argument("--version", action="version",
                        version=f"frozenperc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    c = sub.add_parser("calibrate", help="build the scale/holes tables",
                       parents=[common])
    c.add_argument("--quick", action="store_true",
                   help="small sample counts, looser tables")
    c.add_argument("--law", action="store_true",
                   help="also sample the hole-volume law grid")

    s = sub.add_parser("simulate", help="run the frozen process once", parents=[common])
    s.add_argument("--side", type=int, default=128)
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--state-out", type=str, default=None,
                   help="write the final state bitmap JSON here")

    sc = sub.add_parser("scales", help="exceptional-scale report", parents=[common])
    sc.add_argument("--N", type=int, required=True)
    sc.add_argument("--k", type=int, default=6)
    sc.add_argument("--backend", choices=("powerlaw", "calibrated"),
                    default="powerlaw")
    sc.add_argument("--alpha", type=float, default=None,
                    help="also print the modified exponent recursion")

    ch = sub.add_parser("chains", help="run the surrogate or hole chain", parents=[common])
    ch.add_argument("--kind", choices=("ptilde", "starstar"), default="ptilde")
    ch.add_argument("--k", type=int, default=4)
    ch.add_argument("--paths", type=int, default=1000)
    ch.add_argument("--N", type=int, default=4000)

    cp = sub.add_parser("coupling", help="nested conditioned-Bernoulli coupling", parents=[common])
    cp.add_argument("--n", type=int, default=3)
    cp.add_argument("--rates", type=str, default="0.2,0.5,0.7")
    cp.add_argument("--check", action="store_true",
                    help="verify marginals exactly; exit 3 on failure")

    ex = sub.add_parser("experiment", help="run a named experiment", parents=[common])
    ex.add_argument("id", choices=sorted(EXPERIMENTS))
    ex.add_argument("--calibration", type=str, default=None,
                    help="calibration JSON (default: the cache)")
    return parser


def _calibration_path(args) -> Path:
    if getattr(args, "calibration", None):
        return Path(args.calibration)
    return cache_dir() / f"calibration-seed{args.seed}.json"


def _cmd_calibrate(args) -> int:
    if args.quick:
        table = calibrate(seed=args.seed, L_samples=600, theta_budget=600,
                          pi1_samples=4000, progress=_echo)
        law = sample_hole_law(args.seed, table, samples_per_p=300,
                              progress=_echo) if args.law else None
    else:
        table = calibrate(seed=args.seed, progress=_echo)
        law = sample_hole_law(args.seed, table, progress=_echo) \
            if args.law else None
    out = Path(args.out) if args.out else cache_dir() / \
        f"calibration-seed{args.seed}.json"
    save_calibration(table, law, out)
    print(f"calibration written to {out}")
    print(f"c_theta = {table.c_theta:.4f}, pi1 exponent = "
          f"{getattr(table.pi1, 'exponent', float('nan')):.4f}")
    return 0


def _cmd_simulate(args) -> int:
    half = args.side // 2
    dom = Domain(np.ones((args.side, args.side), dtype=bool), (-half, -half))
    field = TauField(args.seed)
    forest, trace = run_frozen(field, dom, args.N)
    csv = trace.to_csv()
    if args.out:
        Path(args.out).write_text(csv)
        print(f"trace written to {args.out}")
    else:
        sys.stdout.write(csv)
    print(f"# events={len(trace.events)} origin_frozen={trace.origin_frozen_at_one} "
          f"final_origin_volume={trace.final_origin_volume}")
    if args.state_out:
        codes = forest.state_codes_at(1.0)
        blob = {"domain": dom.to_json(),
                "states": ["".join(row) for row in codes]}
        Path(args.state_out).write_text(json.dumps(blob))
        print(f"final state written to {args.state_out}")
    return 0


def _cmd_scales(args) -> int:
    if args.backend == "powerlaw":
        table = ScaleTable.power_law(args.N)
    else:
        table, _ = load_calibration(_calibration_path(args))
        table = table.with_N(args.N)
    ms = m_sequence(table, args.k)
    minf = m_infinity(table)
    print(f"N = {args.N}  backend = {args.backend}  c_theta = {table.c_theta:.4f}")
    print(f"m_infinity = {minf}")
    print("k  m_k        delta_k              q_k")
    for k in range(args.k + 1):
        d = delta_k(k)
        try:
            q = f"{q_of_scale(table, ms[k]):.6f}" if ms[k] > 1 else "-"
        except SaturationError:
            q = "saturated"
        print(f"{k}  {ms[k]:<10d} {str(d):<20s} {q}")
    print(f"delta_infinity = {delta_limit()} = {float(delta_limit()):.6f}")
    if args.alpha is not None:
        print(f"modified recursion, alpha = {args.alpha}:")
        for k in range(args.k + 1):
            print(f"  delta^a_{k} = {float(delta_k(k, args.alpha)):.6f}")
        print(f"  limit = {float(delta_limit(args.alpha)):.6f}")
    return 0


def _cmd_chains(args) -> int:
    table, law = load_calibration(_calibration_path(args))
    table = table.with_N(args.N)
    if args.kind == "ptilde":
        if law is None:
            raise StaleCalibrationError("hole-volume law missing; "
                                        "run calibrate --law")
        cfg = ExperimentConfig("chain-deconcentration", seed=args.seed,
                               params={"k": args.k, "paths": args.paths,
                                       "N": args.N})
        rec = run_experiment("chain-deconcentration", cfg, table, law)
        _emit(rec, args)
        return 0
    from .chains import run_star_star_chain
    field = TauField(args.seed)
    from .scales import m_infinity as minf_fn
    R = max(8, int(0.4 * minf_fn(table)))
    dom = Domain.ball(R)
    steps = run_star_star_chain(field, dom, table, args.k)
    print("step  K          logL       p          volume")
    for st in steps:
        p = f"{st.p:.6f}" if st.p is not None else "saturated"
        vol = st.volume if st.volume is not None else "-"
        print(f"{st.index:<5d} {st.K:<10.1f} {st.log_L:<10.3f} {p:<10s} {vol}")
    return 0


def _cmd_coupling(args) -> int:
    rates = [float(x) for x in args.rates.split(",")]
    if len(rates) != args.n:
        rates = rates[:args.n] if len(rates) > args.n else \
            rates + [rates[-1]] * (args.n - len(rates))
    path = monotone_coupling(rates, seed=args.seed)
    print(f"rates = {rates}")
    print("sampled nested path:", [sorted(s) for s in path.sets()])
    if args.check:
        claimed, constructed = coupling_level_laws(rates)
        worst_tv = 0.0
        worst_row = 0.0
        from .chains import coupling_transition_weights
        for i in range(len(rates) + 1):
            keys = set(claimed[i]) | set(constructed[i])
            tv = 0.5 * sum(abs(claimed[i].get(T, 0.0) - constructed[i].get(T, 0.0))
                           for T in keys)
            worst_tv = max(worst_tv, tv)
            print(f"level {i}: TV(constructed, conditional) = {tv:.3e}")
            if i < len(rates):
                for S in claimed[i]:
                    w, Z = coupling_transition_weights(rates, S)
                    worst_row = max(worst_row, abs(sum(w.values()) / Z - 1.0))
        print(f"worst TV = {worst_tv:.3e}, worst row-sum residual = {worst_row:.3e}")
        if worst_tv >= 1e-12 or worst_row >= 1e-14:
            print("coupling check FAILED")
            return CHECK_EXIT
        print("coupling check passed")
    return 0


def _cmd_experiment(args) -> int:
    params = {}
    if args.config:
        params = json.loads(Path(args.config).read_text())
    cfg = ExperimentConfig(args.id, seed=args.seed, replicas=args.replicas,
                           threads=args.threads, params=params)
    table = law = None
    needs_table = EXPERIMENTS[args.id][1]
    if needs_table:
        table, law = load_calibration(_calibration_path(args))
    rec = run_experiment(args.id, cfg, table, law)
    _emit(rec, args)
    failed = rec.summary.get("nonincreasing") is False \
        or rec.summary.get("nondecreasing") is False
    return CHECK_EXIT if failed else 0


def _emit(rec, args):
    if args.out:
        rec.write(args.out)
        print(f"results written to {args.out}")
    else:
        sys.stdout.write(rec.to_csv())


def _echo(msg):
    print(f"  {msg}", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "calibrate": _cmd_calibrate,
        "simulate": _cmd_simulate,
        "scales": _cmd_scales,
        "chains": _cmd_chains,
        "coupling": _cmd_coupling,
        "experiment": _cmd_experiment,
    }
    try:
        return handlers[args.command](args)
    except (StaleCalibrationError, SaturationError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return RUNTIME_EXIT


if __name__ == "__main__":
    sys.exit(main())
