"""Clipping an L2-accurate estimate into a band around an L-infinity-accurate one."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .global_recon import GlobalPlan, make_global_plan, plan_size, reconstruct_global
from .holder_recon import GridInterpolant, grid_plan


def clip_values(g, h, delta):
    """Pointwise ``h + clip(g - h, -delta, delta)``; identical to the three-branch rule."""
    g = np.asarray(g, dtype=float)
    h = np.asarray(h, dtype=float)
    if np.any(np.asarray(delta) < 0):
        raise ValueError("delta must be nonnegative")
    out = np.where(g >= h + delta, h + delta, np.where(g <= h - delta, h - delta, g))
    return out if out.ndim else float(out)


@dataclass
class ClipCombiner:
    g: object
    h: object
    delta: float

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")

    def __call__(self, x):
        return clip_eval(self, x)


def clip_eval(c: ClipCombiner, x):
    return clip_values(c.g(x), c.h(x), c.delta)


def clip_bound(epsilon: float, delta: float, p: float) -> float:
    """``2 eps^(2/p) delta^(1 - 2/p)``, the Lp error of the clipped estimate."""
    if p < 2:
        raise ValueError("p must be >= 2")
    if math.isinf(p):
        return 2.0 * delta
    return 2.0 * epsilon ** (2.0 / p) * delta ** (1.0 - 2.0 / p)


def epsilon_for_budget(m: int, sigma: float, dim: int, kappa0: float = 1.0,
                       log_power: float = 4.0, lo: float = 1e-6) -> float:
    """Smallest ``epsilon`` (up to 1e-9 relative) whose plan needs at most ``m`` samples."""
    if plan_size(lo, sigma, dim, kappa0, log_power) <= m:
        return lo
    a, b = math.log(lo), 0.0  # plan_size is non-increasing in epsilon
    for _ in range(200):
        mid = 0.5 * (a + b)
        if plan_size(math.exp(mid), sigma, dim, kappa0, log_power) <= m:
            b = mid
        else:
            a = mid
        if b - a < 1e-9:
            break
    return math.exp(b)


@dataclass
class SplitBudgetEstimator:
    """Half of the budget feeds the patched sparse recovery, half a Lagrange grid."""

    p: float
    plan: GlobalPlan
    grid: GridInterpolant

    @property
    def points(self) -> np.ndarray:
        return np.concatenate([self.plan.points, self.grid.nodes], axis=0)

    @property
    def total_samples(self) -> int:
        return self.plan.total_samples + self.grid.size

    def split(self, values):
        values = np.asarray(values, dtype=float).reshape(-1)
        k = self.plan.total_samples
        return values[:k], values[k:]

    def fit(self, values, delta: float, cutoff=None, solver_cfg=None) -> ClipCombiner:
        l2_vals, grid_vals = self.split(values)
        g = reconstruct_global(l2_vals, self.plan, cutoff, solver_cfg)
        h = self.grid.fit(grid_vals)
        return ClipCombiner(g, h, float(delta))

    def fit_grid(self, values) -> GridInterpolant:
        return self.grid.fit(self.split(values)[1])


def combine_lp_estimator(m: int, p: float, sigma: float, dim: int, kappa0: float = 1.0,
                         seed: int = 0, log_power: float = 4.0,
                         kappa3: float = 1.0, kappa4: float = 1.0) -> SplitBudgetEstimator:
    """Split ``m`` samples evenly between the L2 and the L-infinity reconstructors."""
    if p < 2:
        raise ValueError("p < 2: the L2 reconstruction already controls the Lp error")
    half = m // 2
    eps = epsilon_for_budget(half, sigma, dim, kappa0, log_power)
    plan = make_global_plan(eps, sigma, dim, kappa0, seed, kappa3, kappa4, log_power)
    grid = grid_plan(m - half, dim, sigma)
    return SplitBudgetEstimator(p, plan, grid)
