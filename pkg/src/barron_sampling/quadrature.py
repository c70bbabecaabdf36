"""Gauss-Legendre tensor quadrature and norm estimates on boxes."""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on ``[0, 1]``."""
    x, w = np.polynomial.legendre.leggauss(int(order))
    return (x + 1) / 2, w / 2


def composite_rule(breaks, order: int) -> tuple[np.ndarray, np.ndarray]:
    """1-D composite rule with one Gauss-Legendre panel between consecutive breaks."""
    breaks = np.unique(np.asarray(breaks, dtype=float))
    x, w = gauss_legendre(order)
    h = np.diff(breaks)
    nodes = (breaks[:-1, None] + h[:, None] * x[None, :]).ravel()
    weights = (h[:, None] * w[None, :]).ravel()
    return nodes, weights


def tensor_rule(rules) -> tuple[np.ndarray, np.ndarray]:
    """Tensor product of 1-D ``(nodes, weights)`` rules -> (M, d) nodes, (M,) weights."""
    grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    wgrids = np.meshgrid(*[r[1] for r in rules], indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    return nodes, weights


def box_rule(lower, upper, order: int) -> tuple[np.ndarray, np.ndarray]:
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    x, w = gauss_legendre(order)
    rules = [(lo + (hi - lo) * x, (hi - lo) * w) for lo, hi in zip(lower, upper)]
    return tensor_rule(rules)


def integrate_power(values: np.ndarray, weights: np.ndarray, p: float) -> float:
    """``sum w |v|^p`` (not yet rooted)."""
    return float(np.sum(weights * np.abs(values) ** p))


def _eval_chunked(fn, nodes, chunk=200_000):
    out = np.empty(nodes.shape[0])
    for s in range(0, nodes.shape[0], chunk):
        out[s:s + chunk] = np.real(fn(nodes[s:s + chunk]))
    return out


def lp_norm_estimate(fn, p: float, resolution: int = 32, dim: int = 1,
                     panels: int = 1, breaks=None, sup_points: int | None = None) -> float:
    """L^p norm of ``fn`` over ``[-1/2, 1/2]^dim``.

    Finite ``p`` uses a composite Gauss-Legendre rule (``resolution`` nodes per
    panel, ``panels`` equal panels per axis unless explicit ``breaks`` are given).
    ``p = inf`` takes the maximum over a uniform grid containing the centre.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    if not p >= 1:
        raise ValueError("p must be >= 1")
    if np.isinf(p):
        per_axis = sup_points or max(resolution, int(round(4e6 ** (1.0 / dim))))
        per_axis += (per_axis + 1) % 2  # odd count so 0 is a node
        axis = np.linspace(-0.5, 0.5, per_axis)
        grid = np.stack([g.ravel() for g in np.meshgrid(*([axis] * dim), indexing="ij")], axis=1)
        return float(np.max(np.abs(_eval_chunked(fn, grid))))
    if breaks is None:
        breaks = np.linspace(-0.5, 0.5, panels + 1)
    rule = composite_rule(breaks, resolution)
    nodes, weights = tensor_rule([rule] * dim)
    vals = _eval_chunked(fn, nodes)
    return integrate_power(vals, weights, p) ** (1.0 / p)


def lp_norm_mc(fn, p: float, dim: int = 1, samples: int = 100_000, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-0.5, 0.5, size=(samples, dim))
    vals = _eval_chunked(fn, pts)
    if np.isinf(p):
        return float(np.max(np.abs(vals)))
    return float(np.mean(np.abs(vals) ** p) ** (1.0 / p))


def cross_checked_norm(fn, p: float, dim: int = 1, resolution: int = 32, panels: int = 1,
                       rel_tol: float = 0.02, samples: int = 100_000, seed: int = 0):
    """Quadrature estimate plus Monte Carlo agreement flag."""
    q = lp_norm_estimate(fn, p, resolution, dim, panels)
    mc = lp_norm_mc(fn, p, dim, samples, seed)
    scale = max(abs(q), 1e-300)
    agree = abs(q - mc) <= rel_tol * scale if np.isfinite(p) else mc <= q * (1 + 1e-12)
    return q, mc, bool(agree)


def corners(lower, upper) -> np.ndarray:
    return np.array(list(itertools.product(*zip(lower, upper))), dtype=float)
