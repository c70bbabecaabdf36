"""Rate experiments, fooling demonstrations and solver benchmarks."""

from __future__ import annotations

import dataclasses
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from . import partition as part
from .adversary import fooling_function
from .barron_core import random_unit_sum
from .cutoff import PlateauCutoff
from .global_recon import (PiecewiseReconstruction, l2_error, make_global_plan,
                           reconstruct_global)
from .holder_recon import grid_plan, lebesgue_constant
from .l1_solver import MeasurementSystem, ToleranceConfig, bpdn_solve
from .local_recon import ReconstructionError
from .lp_combine import clip_bound, combine_lp_estimator, epsilon_for_budget
from .quadrature import composite_rule, lp_norm_estimate, tensor_rule

log = logging.getLogger(__name__)

_LISTS = {"epsilons", "ms"}
_INTS = {"d", "seed", "trials", "resolution", "sup_points", "max_iters", "workers"}
_STRS = {"output"}


@dataclass
class ExperimentConfig:
    d: int = 1
    sigma: float = 1.0
    p: float = 2.0
    epsilons: tuple = ()
    ms: tuple = ()
    oversample: float = 1.0
    kappa0: float = 0.02
    kappa3: float = 1.0
    kappa4: float = 1.0
    log_power: float = 4.0
    seed: int = 0
    trials: int = 10
    resolution: int = 24
    sup_points: int = 65537
    feas_tol: float = 1e-8
    opt_tol: float = 1e-6
    max_iters: int = 50000
    workers: int = 1
    output: str | None = None

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not 1 <= self.p <= math.inf:
            raise ValueError("p must lie in [1, inf]")
        self.epsilons = tuple(float(e) for e in self.epsilons)
        self.ms = tuple(int(m) for m in self.ms)

    @property
    def solver(self) -> ToleranceConfig:
        return ToleranceConfig(self.feas_tol, self.opt_tol, self.max_iters)

    @property
    def budget_scale(self) -> float:
        return self.kappa0 * self.oversample

    def replace(self, **kw) -> "ExperimentConfig":
        return dataclasses.replace(self, **kw)


def _coerce(key: str, raw: str):
    raw = raw.strip()
    if key in _LISTS:
        return tuple(v.strip() for v in raw.split(",") if v.strip())
    if key in _INTS:
        return int(raw)
    if key in _STRS:
        return raw
    return float(raw)


def parse_config(text: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment; lists are comma separated."""
    names = {f.name for f in dataclasses.fields(ExperimentConfig)}
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in names:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def load_config(path=None, **overrides) -> ExperimentConfig:
    values = parse_config(Path(path).read_text()) if path else {}
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isinf(v):
        return "inf"
    if math.isnan(v):
        return "nan"
    return f"{v:.10e}"


@dataclass
class RateRow:
    m: int
    p: float
    sigma: float
    d: int
    mean_err: float
    std_err: float
    bound: float
    epsilon: float = math.nan
    failures: int = 0
    errors: tuple = ()

    def csv(self) -> str:
        return ",".join([str(self.m), _fmt(self.p), _fmt(self.sigma), str(self.d),
                         _fmt(self.mean_err), _fmt(self.std_err), _fmt(self.bound)])


@dataclass
class RateReport:
    rows: list = field(default_factory=list)
    slope: float = math.nan
    ci: tuple = (math.nan, math.nan)
    fit_rows: int = 0

    header = "m,p,sigma,d,mean_err,std_err,bound"

    def to_csv(self) -> str:
        return "\n".join([self.header] + [r.csv() for r in self.rows]) + "\n"

    @property
    def dominance(self) -> float:
        ok = [r.mean_err <= r.bound for r in self.rows if np.isfinite(r.mean_err)]
        return float(np.mean(ok)) if ok else math.nan

    def refit(self, skip_smallest: bool = True) -> "RateReport":
        self.slope, self.ci, self.fit_rows = fit_slope(
            [r.m for r in self.rows], [r.mean_err for r in self.rows], skip_smallest)
        return self


def fit_slope(ms, errs, skip_smallest: bool = True, level: float = 0.95):
    """Least-squares slope of log error vs log m with a t-interval."""
    pairs = sorted((m, e) for m, e in zip(ms, errs) if np.isfinite(e) and e > 0 and m > 0)
    if len(pairs) < len(list(ms)):
        log.warning("excluding %d rows without a usable error", len(list(ms)) - len(pairs))
    if skip_smallest and pairs:
        pairs = pairs[1:]
    if len(pairs) < 3:
        return math.nan, (math.nan, math.nan), len(pairs)
    x = np.log([m for m, _ in pairs])
    y = np.log([e for _, e in pairs])
    res = stats.linregress(x, y)
    half = stats.t.ppf(0.5 + level / 2, len(pairs) - 2) * res.stderr
    return float(res.slope), (float(res.slope - half), float(res.slope + half)), len(pairs)


def trial_rng(seed: int, row: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(row), int(trial)]))


def axis_breaks(levels: int) -> np.ndarray:
    """Per-axis endpoints of the dyadic cells up to ``levels``."""
    a = np.array([part.endpoint(n) for n in range(levels + 2)])
    return np.unique(np.concatenate([-a, a, [-0.5, 0.5]]))


def piecewise_lp_error(f, g, p: float, dim: int, breaks, order: int = 16,
                       sup_points: int = 65537) -> float:
    diff = lambda x: np.real(f(x)) - np.real(g(x))  # noqa: E731
    if math.isinf(p):
        return lp_norm_estimate(diff, p, dim=dim, sup_points=sup_points)
    rule = composite_rule(breaks, order)
    nodes, weights = tensor_rule([rule] * dim)
    vals = np.concatenate([diff(nodes[s:s + 200_000]) for s in range(0, len(nodes), 200_000)])
    return float(np.sum(weights * np.abs(vals) ** p) ** (1 / p))


def holder_bound(n: int, sigma: float, dim: int) -> float:
    """Sup-error bound of the grid interpolant for a unit-norm target.

    Taylor remainder of order ``sigma`` over a stencil of ``q + 1`` nodes,
    amplified by one plus the Lebesgue constant.
    """
    q = math.ceil(sigma)
    h = 1.0 / (n - 1)
    reach = math.sqrt(dim) * q * h / 2
    return (1 + lebesgue_constant(q, dim)) * (2 * math.pi * reach) ** sigma / math.gamma(sigma + 1)


def _trial_errors(fn, trials: int, workers: int):
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, range(trials)))
    return [fn(t) for t in range(trials)]


def _summarize(m, cfg, eps, bound, outcomes) -> RateRow:
    errs = [e for e in outcomes if e is not None]
    fails = len(outcomes) - len(errs)
    if fails:
        log.warning("m=%d: %d of %d trials failed", m, fails, len(outcomes))
    mean = float(np.mean(errs)) if errs else math.nan
    std = float(np.std(errs)) if errs else math.nan
    return RateRow(int(m), cfg.p, cfg.sigma, cfg.d, mean, std, float(bound), float(eps),
                   fails, tuple(errs))


def _row_epsilons(cfg: ExperimentConfig) -> list:
    if cfg.epsilons:
        return list(cfg.epsilons)
    if cfg.ms:
        return [epsilon_for_budget(m, cfg.sigma, cfg.d, cfg.budget_scale, cfg.log_power)
                for m in cfg.ms]
    raise ValueError("provide epsilons or ms")


def _rates_l2(cfg: ExperimentConfig) -> list:
    cutoff = PlateauCutoff.build(cfg.d, cfg.sigma)
    rows = []
    for row, eps in enumerate(_row_epsilons(cfg)):
        plans = {}

        def run(t, eps=eps, row=row):
            plan = make_global_plan(eps, cfg.sigma, cfg.d, cfg.budget_scale,
                                    seed=cfg.seed * 1000003 + row * 1009 + t,
                                    kappa3=cfg.kappa3, kappa4=cfg.kappa4,
                                    log_power=cfg.log_power)
            plans[t] = plan.total_samples
            f = random_unit_sum(trial_rng(cfg.seed, row, t), cfg.d, cfg.sigma)
            try:
                r = reconstruct_global(f(plan.points), plan, cutoff, cfg.solver)
            except ReconstructionError as exc:
                log.warning("eps=%g trial %d: %s", eps, t, exc)
                return None
            if cfg.p == 2:
                return l2_error(f, r, cfg.resolution)
            deepest = max((i.level for i in r.polys), default=0)
            return piecewise_lp_error(f, r, cfg.p, cfg.d, axis_breaks(deepest + 2),
                                      cfg.resolution, cfg.sup_points)

        outcomes = _trial_errors(run, cfg.trials, cfg.workers)
        m = plans[0]
        rows.append(_summarize(m, cfg, eps, 2 * min(eps, 1.0), outcomes))
    return rows


def _grid_sizes(cfg: ExperimentConfig) -> list:
    if not cfg.ms:
        raise ValueError("the sup-norm experiment needs an m list")
    return list(cfg.ms)


def _rates_sup(cfg: ExperimentConfig) -> list:
    rows = []
    for row, m in enumerate(_grid_sizes(cfg)):
        grid = grid_plan(m, cfg.d, cfg.sigma)
        nodes = grid.nodes

        def run(t, row=row, grid=grid, nodes=nodes):
            f = random_unit_sum(trial_rng(cfg.seed, row, t), cfg.d, cfg.sigma)
            h = grid.fit(np.real(f(nodes)))
            return lp_norm_estimate(lambda x: np.real(f(x)) - h(x), math.inf, dim=cfg.d,
                                    sup_points=cfg.sup_points)

        outcomes = _trial_errors(run, cfg.trials, cfg.workers)
        rows.append(_summarize(grid.size, cfg, math.nan,
                               holder_bound(grid.n, cfg.sigma, cfg.d), outcomes))
    return rows


def _rates_clip(cfg: ExperimentConfig) -> list:
    cutoff = PlateauCutoff.build(cfg.d, cfg.sigma)
    rows = []
    for row, m in enumerate(_grid_sizes(cfg)):
        est0 = combine_lp_estimator(m, cfg.p, cfg.sigma, cfg.d, cfg.budget_scale, 0,
                                    cfg.log_power, cfg.kappa3, cfg.kappa4)
        eps = est0.plan.epsilon
        delta = holder_bound(est0.grid.n, cfg.sigma, cfg.d)

        def run(t, row=row, m=m, delta=delta):
            est = combine_lp_estimator(m, cfg.p, cfg.sigma, cfg.d, cfg.budget_scale,
                                       cfg.seed * 1000003 + row * 1009 + t, cfg.log_power,
                                       cfg.kappa3, cfg.kappa4)
            f = random_unit_sum(trial_rng(cfg.seed, row, t), cfg.d, cfg.sigma)
            try:
                c = est.fit(np.real(f(est.points)), delta, cutoff, cfg.solver)
            except ReconstructionError as exc:
                log.warning("m=%d trial %d: %s", m, t, exc)
                return None
            deepest = max((cp.index.level for cp in est.plan.cells), default=0)
            br = np.union1d(axis_breaks(deepest + 2), est.grid.nodes_1d)
            return piecewise_lp_error(f, c, cfg.p, cfg.d, br, cfg.resolution, cfg.sup_points)

        outcomes = _trial_errors(run, cfg.trials, cfg.workers)
        rows.append(_summarize(est0.total_samples, cfg, eps,
                               clip_bound(2 * min(eps, 1.0), delta, cfg.p), outcomes))
    return rows


def run_rates(cfg: ExperimentConfig) -> RateReport:
    """One row per accuracy level (or budget); the error is averaged over trials.

    ``p = 2`` (and ``p < 2``) uses the patched sparse recovery, ``p = inf`` the
    grid interpolant and ``2 < p < inf`` the clipped combination of both.
    """
    if math.isinf(cfg.p):
        rows = _rates_sup(cfg)
    elif cfg.p > 2:
        rows = _rates_clip(cfg)
    else:
        rows = _rates_l2(cfg)
    report = RateReport(rows).refit()
    bad = [r.m for r in rows if np.isfinite(r.mean_err) and r.mean_err > r.bound]
    if bad:
        log.warning("error above the bound column at m = %s", bad)
    if cfg.output:
        Path(cfg.output).write_text(report.to_csv())
    return report


@dataclass
class FoolRow:
    M: int
    N: int
    lambda_hit: int
    barron_bound: float
    lp_norm: float
    err_plus: float
    err_minus: float

    def csv(self) -> str:
        return ",".join([str(self.M), str(self.N), str(self.lambda_hit),
                         _fmt(self.barron_bound), _fmt(self.lp_norm)])


@dataclass
class FoolReport:
    rows: list = field(default_factory=list)
    slope: float = math.nan
    ci: tuple = (math.nan, math.nan)
    target: float = math.nan

    header = "M,N,lambda_hit,barron_bound,lp_norm"

    def to_csv(self) -> str:
        return "\n".join([self.header] + [r.csv() for r in self.rows]) + "\n"


def pipeline_points(cfg: ExperimentConfig, value) -> tuple[np.ndarray, object]:
    """Sample points and a ``values -> estimate`` map of the configured pipeline."""
    cutoff = PlateauCutoff.build(cfg.d, cfg.sigma)
    if math.isinf(cfg.p):
        grid = grid_plan(int(value), cfg.d, cfg.sigma)
        return grid.nodes, grid.fit
    if cfg.p > 2:
        est = combine_lp_estimator(int(value), cfg.p, cfg.sigma, cfg.d, cfg.budget_scale,
                                   cfg.seed, cfg.log_power, cfg.kappa3, cfg.kappa4)
        delta = holder_bound(est.grid.n, cfg.sigma, cfg.d)
        return est.points, lambda y: est.fit(y, delta, cutoff, cfg.solver)
    plan = make_global_plan(float(value), cfg.sigma, cfg.d, cfg.budget_scale, cfg.seed,
                            cfg.kappa3, cfg.kappa4, cfg.log_power)
    return plan.points, lambda y: reconstruct_global(y, plan, cutoff, cfg.solver)


def run_fool(cfg: ExperimentConfig, order: int | None = None) -> FoolReport:
    """Fooling certificates for the pipeline's own sample points.

    Rows come from ``epsilons`` (patched recovery, ``p <= 2``) or ``ms``.  Errors use
    Gauss-Legendre panels between the bump knots, exact for integer ``p``.
    """
    values = cfg.ms if (cfg.ms and cfg.p > 2) or not cfg.epsilons else cfg.epsilons
    if cfg.p <= 2 and not cfg.epsilons and cfg.ms:
        values = [epsilon_for_budget(m, cfg.sigma, cfg.d, cfg.budget_scale, cfg.log_power)
                  for m in cfg.ms]
    rows = []
    for v in values:
        pts, estimator = pipeline_points(cfg, v)
        cert = fooling_function(pts, cfg.sigma, cfg.p, dim=cfg.d, seed=cfg.seed)
        if not cert.vanishing:
            raise AssertionError("fooling function does not vanish on the samples")
        gam = cert.function
        if order is None:
            deg = (gam.profile.order - 1) * (cfg.p if np.isfinite(cfg.p) else 1)
            use = int(math.ceil((deg + 1) / 2)) + 1
        else:
            use = order
        errs = []
        for fn in (gam, gam.negated()):
            est = estimator(fn(pts))
            br = gam.breakpoints()
            if isinstance(est, PiecewiseReconstruction):
                deepest = max((i.level for i in est.polys), default=0)
                br = np.union1d(br, axis_breaks(deepest + 2))
            errs.append(piecewise_lp_error(fn, est, cfg.p, cfg.d, br, use, cfg.sup_points))
        rows.append(FoolRow(cert.M, cert.N, cert.lambda_hit, cert.barron_bound,
                            cert.lp_norm, errs[0], errs[1]))
    rep = FoolReport(rows, target=-(1 / max(2.0, cfg.p) + cfg.sigma / cfg.d))
    rep.slope, rep.ci, _ = fit_slope([r.M for r in rows], [r.lp_norm for r in rows],
                                     skip_smallest=False)
    if cfg.output:
        Path(cfg.output).write_text(rep.to_csv())
    return rep


@dataclass
class BenchRow:
    s: int
    trials: int
    successes: int
    mean_iters: float
    mean_ms: float

    def csv(self) -> str:
        return f"{self.s},{self.trials},{self.successes},{self.mean_iters:.1f},{self.mean_ms:.3f}"


def sparse_trial(rng: np.random.Generator, s: int, bound: int = 32, m: int = 48,
                 cfg: ToleranceConfig | None = None, tol: float = 1e-4):
    """Noiseless recovery of a random ``s``-sparse vector; returns (success, report)."""
    system = MeasurementSystem(1, bound, rng.uniform(-0.5, 0.5, size=(m, 1)))
    z = np.zeros(system.n, dtype=complex)
    supp = rng.choice(system.n, size=s, replace=False)
    z[supp] = rng.normal(size=s) + 1j * rng.normal(size=s)
    rep = bpdn_solve(system, system.matrix @ z, 0.0, cfg)
    err = np.linalg.norm(rep.solution - z) / max(np.linalg.norm(z), 1e-300)
    return bool(rep.converged and err <= tol), rep


def solver_bench(cfg: ExperimentConfig, sparsities=(1, 2, 3), trials: int = 100) -> list:
    rows = []
    for s in sparsities:
        ok, iters, ms = 0, [], []
        for t in range(trials):
            t0 = time.perf_counter()
            good, rep = sparse_trial(trial_rng(cfg.seed, s, t), s, cfg=cfg.solver)
            ms.append(1e3 * (time.perf_counter() - t0))
            iters.append(rep.iterations)
            ok += good
        rows.append(BenchRow(s, trials, ok, float(np.mean(iters)), float(np.mean(ms))))
    return rows


def reconstruct_scaled(samples, R: float, inner):
    """``R * inner(samples / R)``: lifts a unit-ball reconstruction to radius ``R``."""
    if not R > 0:
        raise ValueError("R must be positive")
    base = inner(np.asarray(samples, dtype=float) / R)

    def scaled(x):
        return R * np.asarray(base(x))

    return scaled


def calibrate_kappa0(cfg: ExperimentConfig, epsilon: float,
                     grid=(0.005, 0.01, 0.02, 0.05, 0.1), ratio: float = 2.0,
                     trials: int = 3) -> float:
    """Smallest budget constant whose mean error stays within ``ratio * epsilon``."""
    for k in sorted(grid):
        rep = run_rates(cfg.replace(kappa0=k, oversample=1.0, epsilons=(epsilon,), ms=(),
                                    trials=trials, p=2.0, output=None))
        if rep.rows[0].mean_err <= ratio * epsilon:
            return k
    return max(grid)
