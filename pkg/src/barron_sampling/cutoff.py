"""B-spline plateau cutoff with a closed-form Fourier transform."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BSpline


def spline_order(dim: int, sigma: float) -> int:
    return int(dim + 3 + math.ceil(sigma))


@dataclass(frozen=True)
class PlateauCutoff:
    """Tensor-product cutoff ``phi(x) = prod_i u(x_i)`` with

    ``u(t) = sum_{|j| <= shifts} B_r(t / scale - j)``, ``B_r`` the centered cardinal
    B-spline of order ``r`` (degree ``r - 1``).  The partition of unity makes ``u``
    exactly one on ``|t| <= scale * (shifts + 1 - r/2)`` and zero beyond
    ``scale * (shifts + r/2)``.
    """

    dim: int
    order: int
    shifts: int
    scale: float

    @classmethod
    def build(cls, dim: int, sigma: float, plateau: float = 0.25,
              order: int | None = None) -> "PlateauCutoff":
        r = spline_order(dim, sigma) if order is None else int(order)
        shifts = math.ceil(1.5 * r - 2) + 1
        scale = plateau / (shifts + 1 - r / 2)
        return cls(dim, r, shifts, scale)

    @property
    def support_radius(self) -> float:
        return self.scale * (self.shifts + self.order / 2)

    @property
    def plateau_radius(self) -> float:
        return self.scale * (self.shifts + 1 - self.order / 2)

    def _spline(self) -> BSpline:
        r, J = self.order, self.shifts
        # zero-weight padding makes the base interval cover the whole support
        pad = r - 1
        knots = np.arange(-J - r / 2 - pad, J + r / 2 + pad + 1)
        coef = np.concatenate([np.zeros(pad), np.ones(2 * J + 1), np.zeros(pad)])
        return BSpline(knots, coef, r - 1, extrapolate=False)

    def profile(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        flat = t.reshape(-1)
        v = np.nan_to_num(self._spline()(flat / self.scale), nan=0.0)
        v[np.abs(flat) >= self.support_radius] = 0.0
        return np.clip(v, 0.0, 1.0).reshape(t.shape)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1, self.dim)
        return np.prod(self.profile(x), axis=1)

    def profile_fourier(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        h = self.scale
        j = np.arange(-self.shifts, self.shifts + 1)
        dirichlet = np.cos(2 * np.pi * h * xi[..., None] * j).sum(axis=-1)
        return h * np.sinc(h * xi) ** self.order * dirichlet

    def fourier(self, xi) -> np.ndarray:
        """``int phi(x) e^{-2 pi i <x, xi>} dx`` (real because phi is even)."""
        xi = np.asarray(xi, dtype=float).reshape(-1, self.dim)
        return np.prod(self.profile_fourier(xi), axis=1)

    def profile_envelope(self, xi) -> np.ndarray:
        """Pointwise upper bound of ``|u^(xi)|`` from ``|sinc| <= min(1, 1/(pi|.|))``."""
        xi = np.abs(np.asarray(xi, dtype=float))
        h, r = self.scale, self.order
        peak = h * (2 * self.shifts + 1)
        with np.errstate(divide="ignore"):
            tail = peak * (np.pi * h * xi) ** (-float(r))
        return np.minimum(peak, tail)

    def decay_constant(self) -> float:
        """Constant ``K`` with ``|phi^(xi)| <= K (1 + |xi|)^(-order)`` for all ``xi``."""
        h, r = self.scale, self.order
        one_d = h * (2 * self.shifts + 1) * (1 + 1 / (np.pi * h)) ** r
        return float(one_d ** self.dim)

