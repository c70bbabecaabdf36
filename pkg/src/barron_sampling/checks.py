"""Invariant suites shared by the ``check`` subcommand and the acceptance tests.

Every check returns a :class:`CheckResult`; none of them raises on failure.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import partition as part
from .adversary import cosine_constant, fooling_function, index_set, linear_avg_residual
from .barron_core import Weight, barron_norm_bound, random_unit_sum
from .cutoff import PlateauCutoff
from .harness import (ExperimentConfig, fit_slope, run_fool, run_rates, sparse_trial,
                      trial_rng)
from .l1_solver import MeasurementSystem, bpdn_solve
from .local_recon import weighted_coeff_sum
from .lp_combine import clip_bound, clip_values

RATE_MS = tuple(2 ** k for k in range(6, 13))


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float = math.nan
    detail: str = ""
    extra: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def check_l2_rate(ms=RATE_MS, trials: int = 10, kappa0: float = 0.02,
                  threshold: float = -1.25) -> CheckResult:
    t0 = time.perf_counter()
    cfg = ExperimentConfig(d=1, sigma=1.0, p=2.0, ms=tuple(ms), trials=trials, kappa0=kappa0)
    rep = run_rates(cfg)
    elapsed = time.perf_counter() - t0
    ms_used = [r.m for r in rep.rows]
    # slope against m / ln^4(e + m): what remains once the logarithmic factor is removed
    eff = [m / math.log(math.e + m) ** 4 for m in ms_used]
    log_slope, _, _ = fit_slope(eff, [r.mean_err for r in rep.rows])
    ok = bool(np.isfinite(rep.slope) and rep.slope <= threshold)
    detail = (f"slope {rep.slope:.3f} (95% CI {rep.ci[0]:.3f}..{rep.ci[1]:.3f}) vs <= {threshold}; "
              f"log-corrected slope {log_slope:.3f}; m = {ms_used}; {elapsed:.0f}s")
    return CheckResult("L2 rate", ok, rep.slope, detail,
                       {"report": rep, "log_slope": log_slope, "seconds": elapsed})


def check_sup_rate(sigmas=(1.0, 2.0), ns=(16, 32, 64, 128, 256), trials: int = 5,
                   slack: float = 0.2) -> CheckResult:
    slopes, ok = {}, True
    for s in sigmas:
        rep = run_rates(ExperimentConfig(d=1, sigma=s, p=math.inf, ms=tuple(ns), trials=trials))
        slopes[s] = rep.slope
        ok &= bool(np.isfinite(rep.slope) and rep.slope <= -s + slack)
    detail = ", ".join(f"sigma={s:g}: slope {v:.3f} (<= {-s + slack:g})" for s, v in slopes.items())
    return CheckResult("Linf rate", ok, max(slopes.values()), detail, {"slopes": slopes})


def clip_instance(rng: np.random.Generator, p: float, size: int | None = None):
    """Random discrete instance; returns (lhs, bound)."""
    size = size or int(rng.integers(1, 64))
    w = rng.dirichlet(np.ones(size))
    f = rng.normal(size=size) * rng.choice([1e-3, 1.0, 1e3])
    g = f + rng.normal(size=size) * rng.uniform(0, 2) * (rng.random(size) < 0.5)
    h = f + rng.uniform(-1, 1, size=size) * rng.uniform(0, 1)
    eps = float(np.sqrt(np.sum(w * (g - f) ** 2)))
    delta = float(np.max(np.abs(h - f)))
    c = clip_values(g, h, delta)
    err = np.abs(c - f)
    lhs = float(err.max()) if math.isinf(p) else float(np.sum(w * err ** p) ** (1 / p))
    return lhs, clip_bound(eps, delta, p)


def check_clip(instances: int = 1000, ps=(2, 3, 4, 8, math.inf), seed: int = 0,
               tol: float = 1e-12) -> CheckResult:
    rng = np.random.default_rng(seed)
    viol, worst = 0, -math.inf
    for i in range(instances):
        p = ps[i % len(ps)]
        lhs, rhs = clip_instance(rng, p)
        worst = max(worst, lhs - rhs)
        viol += lhs > rhs + tol
    return CheckResult("clipping bound", viol == 0, viol,
                       f"{viol} violations in {instances} instances (max excess {worst:.2e})")


def check_solver(trials: int = 100, seed: int = 0) -> CheckResult:
    succ = {s: sum(sparse_trial(trial_rng(seed, s, t), s)[0] for t in range(trials))
            for s in (1, 2, 3)}
    rng = np.random.default_rng(seed + 1)
    sq_err = 0.0
    for _ in range(10):
        sysm = MeasurementSystem(1, 4, rng.uniform(-0.5, 0.5, size=(9, 1)))
        y = rng.normal(size=9) + 1j * rng.normal(size=9)
        rep = bpdn_solve(sysm, y, 0.0)
        z = np.linalg.solve(sysm.matrix, y)
        sq_err = max(sq_err, float(np.max(np.abs(rep.solution - z)) / np.max(np.abs(z))))
    sysm = MeasurementSystem(1, 16, rng.uniform(-0.5, 0.5, size=(24, 1)))
    y = rng.normal(size=24)
    base = bpdn_solve(sysm, y, 0.2)
    eq_err = 0.0
    for c in (1e-3, 7.5, 1e4):
        rep = bpdn_solve(sysm, c * y, 0.2 * c)
        eq_err = max(eq_err, float(np.max(np.abs(rep.solution - c * base.solution))
                                   / np.max(np.abs(c * base.solution))))
    need = math.ceil(0.95 * trials)
    ok = all(v >= need for v in succ.values()) and sq_err <= 1e-6 and eq_err <= 1e-8
    detail = (f"sparse successes {succ} of {trials} (need {need}); square max rel err "
              f"{sq_err:.1e}; scaling rel err {eq_err:.1e}")
    return CheckResult("l1 solver", ok, min(succ.values()), detail)


def check_partition(points: int = 100_000, seed: int = 0) -> CheckResult:
    exact = all(Fraction(part.endpoint(n)) == Fraction(1, 2) * (1 - Fraction(1, 2 ** n))
                for n in range(53))  # every endpoint a double can hold
    rng = np.random.default_rng(seed)
    inv_err = 0.0
    for _ in range(200):
        d = int(rng.integers(1, 4))
        # cell coordinates are x-space doubles, so deep cells resolve t only to 2^level ulp;
        # the t round trip is checked where that stays below the tolerance
        deep = part.cell(part.CellIndex(rng.integers(0, 30, size=d), rng.choice([1, -1], size=d)))
        shallow = part.cell(part.CellIndex(rng.integers(0, 5, size=d), rng.choice([1, -1], size=d)))
        t = rng.uniform(-0.5, 0.5, size=(50, d))
        x = rng.uniform(deep.lower, deep.upper, size=(50, d))
        inv_err = max(inv_err, float(np.max(np.abs(shallow.forward(shallow.inverse(t)) - t))),
                      float(np.max(np.abs(deep.inverse(deep.forward(x)) - x))))
    x = rng.uniform(-0.5, 0.5, size=(points, 2))
    levels, _, valid = part.locate(x)
    counts = np.zeros(points, dtype=int)
    top = int(levels.sum(axis=1).max()) + 1
    for k in range(top + 1):
        for n in ((i, k - i) for i in range(k + 1)):
            for th in part.signs(2):
                counts += part.cell(part.CellIndex(n, th)).contains(x)
    unique = bool(np.all(counts == 1) and np.all(valid))
    vol_err = 0.0
    for d in (1, 2, 3):
        K = 40
        tot = sum(math.comb(k + d - 1, d - 1) * 2 ** d * 2.0 ** (-2 * d - k)
                  for k in range(K + 1))
        vol_err = max(vol_err, abs(tot + part.tail_volume(d, K) - 1.0))
    ok = exact and inv_err <= 1e-14 and unique and vol_err <= 1e-12
    detail = (f"endpoints exact={exact}; inverse err {inv_err:.1e}; {points} points in exactly "
              f"one cell={unique}; volume+tail err {vol_err:.1e}")
    return CheckResult("partition", ok, inv_err, detail)


FOOL_CASES = ((1, 1.0, 2.0), (1, 1.0, 4.0), (2, 1.0, 2.0))


def _fool_plans(d: int, p: float) -> ExperimentConfig:
    if p > 2:
        return ExperimentConfig(d=d, sigma=1.0, p=p, ms=(64, 256, 1024))
    eps = (0.08, 0.03, 0.012) if d == 1 else (0.2, 0.1, 0.05)
    return ExperimentConfig(d=d, sigma=1.0, p=p, epsilons=eps)


def check_fooling(ms=(8, 32, 128, 512, 2048), seed: int = 0, tol: float = 0.25):
    """Returns the certificate check and the indistinguishable-pair check."""
    lines, ok_cert, ok_pair, worst_gap = [], True, True, math.inf
    for d, sigma, p in FOOL_CASES:
        rng = np.random.default_rng(seed + d)
        norms = []
        for M in ms:
            pts = rng.uniform(-0.5, 0.5, size=(M, d))
            cert = fooling_function(pts, sigma, p, dim=d, seed=seed)
            ok_cert &= cert.vanishing and cert.barron_bound <= 1.0
            norms.append(cert.lp_norm)
        slope, _, _ = fit_slope(ms, norms, skip_smallest=False)
        target = -(1 / max(2.0, p) + sigma / d)
        ok_cert &= abs(slope - target) <= tol
        rep = run_fool(_fool_plans(d, p))
        for r in rep.rows:
            ok_cert &= r.barron_bound <= 1.0
            gap = max(r.err_plus, r.err_minus) - (r.lp_norm - 1e-9)
            worst_gap = min(worst_gap, gap)
            ok_pair &= gap >= 0
        lines.append(f"(d={d},p={p:g}) slope {slope:.3f} vs {target:.3f}")
    cert = CheckResult("fooling certificate", bool(ok_cert), math.nan,
                       "; ".join(lines) + "; vanishing and bound <= 1 verified")
    pair = CheckResult("indistinguishable pair", bool(ok_pair), worst_gap,
                       f"min over trials of max(err+, err-) - (lp_norm - 1e-9) = {worst_gap:.3e}")
    return cert, pair


def _bases(rng, r: int, d: int, gamma: float, sigma: float):
    etas = index_set(gamma, sigma, d)
    picks = etas[rng.choice(len(etas), size=r, replace=False)]
    own = [(lambda x, e=e: np.sqrt(2) * np.cos(2 * np.pi * x @ e)) for e in picks]
    freqs = rng.uniform(0, etas.max() + 2, size=(r, d))
    phases = rng.uniform(0, 2 * np.pi, size=r)
    waves = [(lambda x, k=k, ph=ph: np.cos(2 * np.pi * x @ k + ph)) for k, ph in zip(freqs, phases)]
    polys = [(lambda x, j=j: np.prod(np.polynomial.legendre.legval(2 * x, [0] * j + [1]), axis=1))
             for j in range(r)]
    return {"family subset": own, "random waves": waves, "Legendre": polys}


def check_linear(seed: int = 0, sigma: float = 1.0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst, ok, cases = math.inf, True, 0
    for d in (1, 2):
        for r in (4, 16):
            K = next(k for k in range(200) if (k + 1) ** d >= 4 * r)
            gamma = cosine_constant(d, sigma) * (K + 1) ** sigma * (1 + 1e-9)
            assert len(index_set(gamma, sigma, d)) >= 4 * r
            for name, basis in _bases(rng, r, d, gamma, sigma).items():
                val = linear_avg_residual(basis, gamma, sigma, d)
                margin = val - (1 / (2 * gamma) - 1e-6)
                worst = min(worst, margin * gamma)
                ok &= margin >= 0
                cases += 1
    return CheckResult("linear lower bound", bool(ok), worst,
                       f"{cases} bases; min (avg residual - 1/(2 gamma)) * gamma = {worst:.3f}")


def rate_family(ms=RATE_MS, trials: int = 10, seed: int = 0, sigma: float = 1.0, dim: int = 1):
    """The test functions drawn by the L2 rate experiment."""
    return [random_unit_sum(trial_rng(seed, row, t), dim, sigma)
            for row in range(len(ms)) for t in range(trials)]


def check_embedding(points: int = 20_000, seed: int = 0, sigma: float = 1.0) -> CheckResult:
    rng = np.random.default_rng(seed)
    viol, worst = 0, 0.0
    x = np.concatenate([rng.uniform(-0.5, 0.5, size=(points, 1)),
                        np.linspace(-0.5, 0.5, 4097)[:, None]])
    for f in rate_family(sigma=sigma):
        b = barron_norm_bound(f, Weight(sigma))
        sup = float(np.max(np.abs(f(x))))
        worst = max(worst, sup / b)
        viol += sup > b
    return CheckResult("embedding", viol == 0, worst,
                       f"{viol} violations; max |f|/bound = {worst:.3f}")


def check_summability(count: int = 50, seed: int = 0, sigma: float = 1.0) -> CheckResult:
    rng = np.random.default_rng(seed)
    cutoff = PlateauCutoff.build(1, sigma)
    worst, finite = 0.0, True
    for _ in range(count):
        f = random_unit_sum(rng, 1, sigma)
        a = sum(weighted_coeff_sum(f, cutoff, sigma, 128))
        b = sum(weighted_coeff_sum(f, cutoff, sigma, 256))
        finite &= math.isfinite(a) and math.isfinite(b)
        worst = max(worst, abs(b - a) / a)
    return CheckResult("coefficient summability", bool(finite and worst < 0.05), worst,
                       f"max relative change R=128 -> 256: {worst:.2%}")


def run_all(quick: bool = False) -> list[CheckResult]:
    if quick:
        rate = check_l2_rate(ms=RATE_MS[:5], trials=2)
    else:
        rate = check_l2_rate()
    fool, pair = check_fooling()
    return [rate, check_sup_rate(), check_clip(), check_solver(), check_partition(), fool,
            pair, check_linear(), check_embedding(), check_summability()]


CHECKS = {
    "l2-rate": check_l2_rate, "linf-rate": check_sup_rate, "clip": check_clip,
    "solver": check_solver, "partition": check_partition, "fooling": check_fooling,
    "linear": check_linear, "embedding": check_embedding, "summability": check_summability,
}
