"""Local tensor Lagrange interpolation on uniform grids over the cube."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .barron_core import as_points


def _int_root(m: int, d: int) -> int:
    n = int(round(m ** (1.0 / d)))
    while n ** d > m:
        n -= 1
    while (n + 1) ** d <= m:
        n += 1
    return n


@dataclass
class GridInterpolant:
    dim: int
    n: int
    order: int
    values: np.ndarray | None = None

    @property
    def nodes_1d(self) -> np.ndarray:
        return np.linspace(-0.5, 0.5, self.n)

    @property
    def nodes(self) -> np.ndarray:
        axis = self.nodes_1d
        grids = np.meshgrid(*([axis] * self.dim), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    @property
    def size(self) -> int:
        return self.n ** self.dim

    def fit(self, samples) -> "GridInterpolant":
        v = np.asarray(samples, dtype=float).reshape(-1)
        if v.size != self.size:
            raise ValueError(f"expected {self.size} samples, got {v.size}")
        return GridInterpolant(self.dim, self.n, self.order, v.reshape((self.n,) * self.dim))

    def __call__(self, x) -> np.ndarray:
        return interpolate_eval(self, x)


def grid_plan(m: int, dim: int, sigma: float) -> GridInterpolant:
    q = math.ceil(sigma)
    if m < (q + 1) ** dim:
        raise ValueError(f"budget {m} too small: need at least {(q + 1) ** dim} nodes")
    n = max(_int_root(int(m), dim), q + 1)
    return GridInterpolant(dim, n, q)


def _stencil(x: np.ndarray, n: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Start index and Lagrange weights of the ``q + 1`` nearest nodes for each x."""
    pos = (x + 0.5) * (n - 1)
    start = np.floor(pos - (q - 1) / 2.0).astype(int)
    start = np.clip(start, 0, n - q - 1)
    t = pos - start  # local coordinate, nodes at 0..q
    w = np.ones((x.size, q + 1))
    for j in range(q + 1):
        for k in range(q + 1):
            if k != j:
                w[:, j] *= (t - k) / (j - k)
    return start, w


def interpolate_eval(g: GridInterpolant, x) -> np.ndarray:
    if g.values is None:
        raise ValueError("interpolant has no samples; call fit first")
    pts, single = as_points(x, g.dim)
    q = g.order
    starts, weights = zip(*[_stencil(pts[:, a], g.n, q) for a in range(g.dim)])
    out = np.zeros(pts.shape[0])
    for offs in itertools.product(range(q + 1), repeat=g.dim):
        idx = tuple(starts[a] + offs[a] for a in range(g.dim))
        w = np.prod([weights[a][:, offs[a]] for a in range(g.dim)], axis=0)
        out += w * g.values[idx]
    return out[0] if single else out


@lru_cache(maxsize=None)
def lebesgue_constant(q: int, dim: int = 1, resolution: int = 20001) -> float:
    """Max of ``sum_j |l_j(t)|`` over ``t in [0, q]`` for nodes ``0..q``, to the power ``dim``.

    Covers interior and boundary-clamped stencils alike.
    """
    t = np.linspace(0.0, q, resolution)
    total = np.zeros_like(t)
    for j in range(q + 1):
        lj = np.ones_like(t)
        for k in range(q + 1):
            if k != j:
                lj *= (t - k) / (j - k)
        total += np.abs(lj)
    return float(total.max() * (1 + 1e-9)) ** dim
