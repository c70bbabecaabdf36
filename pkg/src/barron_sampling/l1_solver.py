"""Basis pursuit denoising for Fourier point-evaluation systems.

Solves ``min ||z||_1  s.t.  ||y - A z||_2 <= eta * sqrt(m)`` over complex ``z`` with
``A[i, l] = exp(2 pi i <k_l, x_i>)`` using primal-dual (Chambolle-Pock) iterations.
Iterates are made exactly feasible at every check and optimality is certified
by a duality gap, so a report flagged ``converged`` is always trustworthy.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .trig_poly import lattice

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ToleranceConfig:
    """Tolerances for the problem normalized to ``||y|| = 1``: feasibility within
    ``feas_tol * (1 + ||y||)``, duality gap within ``opt_tol * (1 + objective)``."""

    feas_tol: float = 1e-8
    opt_tol: float = 1e-6
    max_iters: int = 50000
    check_every: int = 25


class MeasurementSystem:
    """Point evaluations of the exponentials ``e_k``, ``|k|_inf <= bound``."""

    def __init__(self, dim: int, bound: int, points):
        self.dim = int(dim)
        self.bound = int(bound)
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        self.points = pts
        self.indices = lattice(self.dim, self.bound)
        self._matrix = None

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def n(self) -> int:
        return self.indices.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = np.exp(2j * np.pi * (self.points @ self.indices.T))
        return self._matrix


@dataclass
class SolverReport:
    solution: np.ndarray
    residual: float
    objective: float
    iterations: int
    converged: bool
    radius: float = 0.0
    dual_bound: float = 0.0
    message: str = ""
    history: list = field(default_factory=list, repr=False)

    @property
    def gap(self) -> float:
        return self.objective - self.dual_bound


def power_norm(A: np.ndarray, iters: int = 100, seed: int = 0) -> float:
    """Power-method estimate of the spectral norm, padded by 1% for safety."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(A.shape[1]) + 1j * rng.standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = A.conj().T @ (A @ v)
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        new = np.sqrt(nw)
        v = w / nw
        if abs(new - est) <= 1e-10 * new:
            est = new
            break
        est = new
    return 1.01 * est


def soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    mag = np.abs(v)
    scale = np.maximum(0.0, 1.0 - t / np.maximum(mag, 1e-300))
    return v * scale


def _phase(v: np.ndarray) -> np.ndarray:
    mag = np.abs(v)
    return np.where(mag > 0, v / np.where(mag > 0, mag, 1.0), 0.0)


def _project_ball(z, center, radius):
    d = z - center
    nd = np.linalg.norm(d)
    if nd <= radius:
        return z
    return center + d * (radius / nd)


class _Feasibility:
    """Maps near-feasible points into the constraint set with minimal change."""

    def __init__(self, A: np.ndarray, y: np.ndarray, radius: float):
        self.A, self.y, self.r = A, y, radius
        u, s, vh = np.linalg.svd(A, full_matrices=False)
        keep = s > s[0] * 1e-12 if s.size else s > 0
        self.rank = int(np.count_nonzero(keep))
        u, s, vh = u[:, keep], s[keep], vh[keep]
        self.pinv = (vh.conj().T / s) @ u.conj().T
        self.anchor = self.pinv @ y
        self.anchor_res = float(np.linalg.norm(A @ self.anchor - y))
        self.full_row_rank = self.rank == A.shape[0]

    def repair(self, x: np.ndarray, Ax: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        res = Ax - self.y
        nres = np.linalg.norm(res)
        if nres <= self.r:
            return x, Ax
        candidates = []
        if self.full_row_rank:
            target = _project_ball(Ax, self.y, self.r)
            xc = x + self.pinv @ (target - Ax)
            candidates.append(xc)
        # convex combination with the least-squares anchor
        ra = self.A @ self.anchor - self.y
        dvec = ra - res
        a = np.vdot(dvec, dvec).real
        b = 2 * np.vdot(res, dvec).real
        c = nres ** 2 - self.r ** 2
        if a > 0:
            disc = max(b * b - 4 * a * c, 0.0)
            # smallest root: the residual crosses the sphere once on the way to the anchor
            t = min(1.0, max(0.0, (-b - np.sqrt(disc)) / (2 * a)))
            candidates.append((1 - t) * x + t * self.anchor)
        else:
            candidates.append(self.anchor.copy())
        best = min(candidates, key=lambda v: np.sum(np.abs(v)))
        return best, self.A @ best


def dual_value(A: np.ndarray, y: np.ndarray, radius: float, q: np.ndarray) -> float:
    """Lower bound on the optimum from dual direction ``q`` (scaled to feasibility)."""
    lin = np.vdot(q, y).real - radius * np.linalg.norm(q)
    if lin <= 0:
        return 0.0
    scale = np.max(np.abs(A.conj().T @ q))
    if scale == 0:
        return 0.0
    return float(lin / scale)


def bpdn_solve(sys: MeasurementSystem, y, eta: float, tol: ToleranceConfig | None = None,
               x0: np.ndarray | None = None) -> SolverReport:
    tol = tol or ToleranceConfig()
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    A = sys.matrix
    y = np.asarray(y, dtype=complex).reshape(-1)
    m, n = A.shape
    if y.shape[0] != m:
        raise ValueError(f"expected {m} measurements, got {y.shape[0]}")
    radius = float(eta) * np.sqrt(m)
    ynorm = float(np.linalg.norm(y))

    if ynorm <= radius:
        return SolverReport(np.zeros(n, dtype=complex), ynorm, 0.0, 0, True, radius, 0.0,
                            "zero is feasible")

    # Work on y / ||y||: the iteration and its stopping rule become scale-free,
    # so solutions are equivariant under y -> c y, eta -> c eta.
    scale = ynorm
    yn, rn = y / scale, radius / scale
    feas_n = tol.feas_tol * 2.0
    fix = _Feasibility(A, yn, rn)
    if fix.anchor_res > rn + feas_n:
        return SolverReport(fix.anchor * scale, fix.anchor_res * scale,
                            float(np.sum(np.abs(fix.anchor))) * scale, 0, False, radius, 0.0,
                            "constraint set is empty")
    # The anchor's own residual may exceed the radius by rounding; widen by that much
    r_eff = max(rn, fix.anchor_res)
    fix.r = r_eff

    L = power_norm(A)
    tau = sigma = 0.99 / L
    x = np.zeros(n, dtype=complex) if x0 is None else np.asarray(x0, dtype=complex) / scale
    xbar = x.copy()
    p = np.zeros(m, dtype=complex)
    best = None
    best_obj = np.inf
    lower = 0.0
    it = 0
    history = []
    AH = A.conj().T
    Ax = A @ x
    alpha = 0.5
    while it < tol.max_iters:
        for _ in range(tol.check_every):
            x_old, p_old, Ax_old = x, p, Ax
            v = p + sigma * (A @ xbar)
            p = v - sigma * _project_ball(v / sigma, yn, r_eff)
            x = soft_threshold(x - tau * (AH @ p), tau)
            Ax = A @ x
            xbar = 2 * x - x_old
            # residual balancing keeps tau * sigma fixed while adapting their ratio
            prim = np.linalg.norm((x_old - x) / tau - AH @ (p_old - p))
            dual = np.linalg.norm((p_old - p) / sigma - (Ax_old - Ax))
            if prim > 2 * dual:
                tau, sigma, alpha = tau / (1 - alpha), sigma * (1 - alpha), alpha * 0.95
            elif dual > 2 * prim:
                tau, sigma, alpha = tau * (1 - alpha), sigma / (1 - alpha), alpha * 0.95
        it += tol.check_every
        xf, Axf = fix.repair(x, Ax)
        obj = float(np.sum(np.abs(xf)))
        if obj < best_obj:
            best, best_obj = xf, obj
        lower = max(lower, dual_value(A, yn, rn, -p),
                    dual_value(A, yn, rn, yn - Axf),
                    dual_value(A, yn, rn, fix.pinv.conj().T @ _phase(xf)))
        history.append((it, best_obj * scale, lower * scale))
        if best_obj - lower <= tol.opt_tol * (1 + best_obj):
            break
    res = float(np.linalg.norm(A @ best - yn))
    converged = (best_obj - lower <= tol.opt_tol * (1 + best_obj)) and res <= rn + feas_n
    msg = "duality gap certified" if converged else "iteration limit reached"
    if not converged:
        log.warning("bpdn: %s after %d iterations (gap %.3g)", msg, it,
                    (best_obj - lower) * scale)
    return SolverReport(best * scale, res * scale, best_obj * scale, it, converged, radius,
                        lower * scale, msg, history)


def coherence_diag(sys: MeasurementSystem) -> float:
    A = sys.matrix
    cols = A / np.linalg.norm(A, axis=0, keepdims=True)
    G = np.abs(cols.conj().T @ cols)
    np.fill_diagonal(G, 0.0)
    return float(G.max()) if G.size > 1 else 0.0
