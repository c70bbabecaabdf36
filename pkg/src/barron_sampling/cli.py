"""Command line entry point ``barron-sampling``."""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import checks
from .barron_core import from_text
from .harness import (ExperimentConfig, load_config, pipeline_points, reconstruct_scaled,
                      run_fool, run_rates, solver_bench)


def _floats(text: str) -> tuple:
    return tuple(v for v in text.split(",") if v.strip())


def _shared(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="text file of key = value pairs")
    p.add_argument("--d", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--p", type=float, help="error exponent; 'inf' for the sup norm")
    p.add_argument("--epsilons", type=_floats, help="comma separated accuracy levels")
    p.add_argument("--ms", type=_floats, help="comma separated sample budgets")
    p.add_argument("--oversample", type=float)
    p.add_argument("--kappa0", type=float)
    p.add_argument("--kappa3", type=float)
    p.add_argument("--kappa4", type=float)
    p.add_argument("--log-power", dest="log_power", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--resolution", type=int, help="Gauss-Legendre order per panel")
    p.add_argument("--workers", type=int)
    p.add_argument("--feas-tol", dest="feas_tol", type=float)
    p.add_argument("--opt-tol", dest="opt_tol", type=float)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("-o", "--output", help="CSV destination (stdout if omitted)")


_KEYS = ("d", "sigma", "p", "epsilons", "ms", "oversample", "kappa0", "kappa3", "kappa4",
         "log_power", "seed", "trials", "resolution", "workers", "feas_tol", "opt_tol",
         "max_iters", "output")


def _config(args) -> ExperimentConfig:
    return load_config(args.config, **{k: getattr(args, k, None) for k in _KEYS})


def _emit(text: str, cfg: ExperimentConfig) -> None:
    if not cfg.output:
        sys.stdout.write(text)


def cmd_rates(args) -> int:
    cfg = _config(args)
    rep = run_rates(cfg)
    _emit(rep.to_csv(), cfg)
    print(f"# slope {rep.slope:.4f} CI [{rep.ci[0]:.4f}, {rep.ci[1]:.4f}] over {rep.fit_rows} rows; "
          f"bound column dominance {rep.dominance:.0%}", file=sys.stderr)
    return 0


def cmd_fool(args) -> int:
    cfg = _config(args)
    rep = run_fool(cfg)
    _emit(rep.to_csv(), cfg)
    for r in rep.rows:
        print(f"# M={r.M}: error on +gamma {r.err_plus:.6e}, on -gamma {r.err_minus:.6e}, "
              f"lp_norm {r.lp_norm:.6e}", file=sys.stderr)
    print(f"# slope {rep.slope:.4f} (target {rep.target:.4f})", file=sys.stderr)
    return 0


def cmd_bench(args) -> int:
    cfg = _config(args)
    rows = solver_bench(cfg, trials=args.bench_trials)
    text = "s,trials,successes,mean_iters,mean_ms\n" + "".join(r.csv() + "\n" for r in rows)
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_check(args) -> int:
    names = args.only or None
    if names:
        results = []
        for n in names:
            r = checks.CHECKS[n]()
            results.extend(r if isinstance(r, tuple) else (r,))
    else:
        results = checks.run_all(quick=args.quick)
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def cmd_reconstruct(args) -> int:
    """Samples of a stored atomic sum (or a value file) -> saved piecewise estimate."""
    cfg = _config(args)
    value = cfg.epsilons[0] if cfg.p <= 2 else cfg.ms[0]
    pts, estimator = pipeline_points(cfg, value)
    if args.function:
        f, _ = from_text(Path(args.function).read_text())
        y = np.real(f(pts))
    elif args.samples:
        y = np.loadtxt(args.samples, delimiter=",", ndmin=1)
    else:
        np.savetxt(args.points_out or sys.stdout, pts, delimiter=",", fmt="%.17g")
        return 0
    est = reconstruct_scaled(y, args.radius, estimator) if args.radius != 1 else estimator(y)
    if args.save and hasattr(est, "save"):
        est.save(args.save)
    if args.eval:
        x = np.loadtxt(args.eval, delimiter=",", ndmin=2)
        np.savetxt(sys.stdout, np.atleast_1d(est(x)), fmt="%.17g")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="barron-sampling",
                                 description="Sampling recovery experiments for Barron functions")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rates", help="error vs sample count; CSV m,p,sigma,d,mean_err,std_err,bound")
    _shared(p)
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("fool", help="fooling certificates; CSV M,N,lambda_hit,barron_bound,lp_norm")
    _shared(p)
    p.set_defaults(func=cmd_fool)

    p = sub.add_parser("solver-bench", help="sparse recovery success rates of the l1 solver")
    _shared(p)
    p.add_argument("--bench-trials", type=int, default=100)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("check", help="run invariant suites; exit 0 iff all pass")
    p.add_argument("--only", nargs="*", choices=sorted(checks.CHECKS))
    p.add_argument("--quick", action="store_true", help="shorter rate experiment")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("reconstruct", help="one-shot reconstruction from samples")
    _shared(p)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--function", help="atomic sum in text form; sampled at the plan points")
    src.add_argument("--samples", help="CSV of sample values in plan-point order")
    p.add_argument("--points-out", help="write the plan points here when no samples are given")
    p.add_argument("--radius", type=float, default=1.0, help="a-priori norm bound R")
    p.add_argument("--save", help="directory for the piecewise estimate")
    p.add_argument("--eval", help="CSV of points at which to print the estimate")
    p.set_defaults(func=cmd_reconstruct)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "p", None) is not None and math.isnan(args.p):
        raise SystemExit("p must be a number")
    return int(args.func(args))


if __name__ == "__main__":
    raise SystemExit(main())
