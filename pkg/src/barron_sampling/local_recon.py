"""Recovery on the inner cube ``[-1/4, 1/4]^d`` from samples on the whole cube.

Samples are multiplied by a plateau cutoff, which turns the target into a
periodic function with summable Fourier coefficients; an l1-minimal coefficient
vector consistent with the weighted samples up to the noise level is returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .barron_core import FourierSum
from .cutoff import PlateauCutoff
from .l1_solver import MeasurementSystem, SolverReport, ToleranceConfig, bpdn_solve
from .trig_poly import TrigPoly, lattice


class ReconstructionError(RuntimeError):
    """Raised when a sparse solve fails; carries the solver report."""

    def __init__(self, message: str, report: SolverReport | None = None, cell=None):
        super().__init__(message)
        self.report = report
        self.cell = cell


def _floor_root(base, expo) -> int:
    with mpmath.workdps(50):
        v = mpmath.power(mpmath.mpf(base), mpmath.mpf(1) / mpmath.mpf(expo))
        return int(mpmath.floor(v + mpmath.mpf(10) ** -40))


def _ceil_root(base, expo) -> int:
    with mpmath.workdps(50):
        v = mpmath.power(mpmath.mpf(base), mpmath.mpf(1) / mpmath.mpf(expo))
        return int(mpmath.ceil(v - mpmath.mpf(10) ** -40))


def spectral_radius(epsilon: float, sigma: float, kappa3: float = 1.0) -> int:
    return _floor_root(mpmath.mpf(2) * mpmath.mpf(kappa3) / mpmath.mpf(epsilon), sigma)


def sparsity_target(epsilon: float, sigma: float, dim: int, kappa3=1.0, kappa4=1.0) -> int:
    lam = mpmath.mpf(1) / 2 + mpmath.mpf(sigma) / dim
    return _ceil_root(3 ** (dim + 1) * mpmath.mpf(kappa3) * mpmath.mpf(kappa4)
                      / mpmath.mpf(epsilon), lam)


@dataclass
class LocalPlan:
    epsilon: float
    sigma: float
    dim: int
    lam: float
    N: int
    s: int
    m: int
    points: np.ndarray
    kappa3: float = 1.0
    kappa4: float = 1.0
    oversample: float = 1.0

    @property
    def bound(self) -> int:
        return 2 * self.N

    @property
    def lattice_size(self) -> int:
        return (4 * self.N + 1) ** self.dim

    @property
    def lattice(self) -> np.ndarray:
        return lattice(self.dim, self.bound)


def make_plan(epsilon: float, sigma: float, dim: int, oversample: float = 1.0,
              rng_seed=0, kappa3: float = 1.0, kappa4: float = 1.0,
              m: int | None = None) -> LocalPlan:
    """Parameters and i.i.d. uniform points for one local problem.

    ``m`` overrides the sample-count formula, which is how the dyadic patching
    hands its own per-cell budgets down.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1); use the zero reconstruction otherwise")
    lam = 0.5 + sigma / dim
    N = spectral_radius(epsilon, sigma, kappa3)
    s = sparsity_target(epsilon, sigma, dim, kappa3, kappa4)
    size = (4 * N + 1) ** dim
    if m is None:
        m = math.ceil(oversample * s * math.log(math.e + size) ** 4)
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    pts = rng.uniform(-0.5, 0.5, size=(int(m), dim))
    return LocalPlan(float(epsilon), float(sigma), dim, lam, N, s, int(m), pts,
                     kappa3, kappa4, oversample)


def localized_coeffs(f: FourierSum, cutoff: PlateauCutoff, radius: int) -> TrigPoly:
    """Exact Fourier coefficients of ``cutoff * f`` on ``|n|_inf <= radius``."""
    idx = lattice(f.dim, radius)
    out = np.zeros(idx.shape[0], dtype=complex)
    for xi, c in zip(f.freqs, f.amps):
        out += c * cutoff.fourier(idx - xi)
    return TrigPoly(f.dim, radius, out)


def _axis_tail(xi: float, R: int, sigma: float, cutoff: PlateauCutoff) -> tuple[float, float]:
    """Head and tail of ``sum_k (1 + |k - xi|)^sigma * env(k - xi)`` split at ``|k| <= R``."""
    h, r = cutoff.scale, cutoff.order
    q = r - sigma
    peak = h * (2 * cutoff.shifts + 1)
    const = peak * (np.pi * h) ** (-r) * 2 ** sigma
    u0 = max(1.0, 1.0 / (np.pi * h))

    def g(k):
        u = np.abs(k - xi)
        return (1 + u) ** sigma * cutoff.profile_envelope(u)

    head = float(np.sum(g(np.arange(-R, R + 1))))
    tail = 0.0
    for side in (1, -1):
        center = side * xi
        last = max(R, math.ceil(center + u0))
        ks = np.arange(R + 1, last + 1)
        if ks.size:
            tail += float(np.sum(g(side * ks)))
        tail += const * (last - center) ** (1 - q) / (q - 1)
    return head, tail


def weighted_coeff_sum(f: FourierSum, cutoff: PlateauCutoff, sigma: float,
                       radius: int) -> tuple[float, float]:
    """``sum_{|n|_inf <= R} (1+|n|)^sigma |c_n|`` and an upper bound for the remainder.

    The remainder bound combines the submultiplicative weight with the per-axis
    sinc envelope of the cutoff transform.
    """
    p = localized_coeffs(f, cutoff, radius)
    idx = p.indices
    w = (1 + np.linalg.norm(idx, axis=1)) ** sigma
    head = float(np.sum(w * np.abs(p.flat)))
    tail = 0.0
    for xi, c in zip(f.freqs, f.amps):
        heads, totals = [], []
        for coord in xi:
            hd, tl = _axis_tail(float(coord), radius, sigma, cutoff)
            heads.append(hd)
            totals.append(hd + tl)
        wj = (1 + np.linalg.norm(xi)) ** sigma
        tail += abs(c) * wj * (np.prod(totals) - np.prod(heads))
    return head, tail


def reconstruct_local(samples, plan: LocalPlan, cutoff: PlateauCutoff,
                      solver_cfg: ToleranceConfig | None = None, eta: float | None = None,
                      return_report: bool = False):
    """Weighted samples -> l1 recovery on the plan lattice.

    ``eta`` defaults to the plan accuracy ``epsilon``.
    """
    y = np.asarray(samples, dtype=float).reshape(-1)
    if y.shape[0] != plan.m:
        raise ValueError(f"expected {plan.m} samples, got {y.shape[0]}")
    z = y * cutoff(plan.points)
    system = MeasurementSystem(plan.dim, plan.bound, plan.points)
    report = bpdn_solve(system, z, plan.epsilon if eta is None else eta, solver_cfg)
    if not report.converged:
        raise ReconstructionError(f"local solve failed: {report.message}", report)
    poly = TrigPoly(plan.dim, plan.bound, report.solution)
    return (poly, report) if return_report else poly
