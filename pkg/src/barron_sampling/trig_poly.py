"""Trigonometric polynomials with dense coefficients on a box lattice."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .barron_core import as_points

ZERO_THRESHOLD = 1e-12


def lattice(dim: int, bound: int) -> np.ndarray:
    """All integer vectors with sup-norm at most ``bound``, in C order, shape (L, dim)."""
    axis = np.arange(-bound, bound + 1)
    grids = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


@dataclass
class TrigPoly:
    """``sum_k coeffs[k] e^{2 pi i <k, x>}`` over ``|k|_inf <= bound``.

    ``coeffs`` has shape ``(2*bound+1,)*dim``; index ``k`` lives at ``k + bound``.
    """

    dim: int
    bound: int
    coeffs: np.ndarray

    def __post_init__(self):
        shape = (2 * self.bound + 1,) * self.dim
        c = np.asarray(self.coeffs, dtype=complex)
        if c.size != int(np.prod(shape)):
            raise ValueError(f"expected {np.prod(shape)} coefficients for bound {self.bound}")
        self.coeffs = c.reshape(shape)

    @classmethod
    def zeros(cls, dim: int, bound: int) -> "TrigPoly":
        return cls(dim, bound, np.zeros((2 * bound + 1,) * dim, dtype=complex))

    @classmethod
    def from_dict(cls, dim: int, bound: int, entries: dict) -> "TrigPoly":
        p = cls.zeros(dim, bound)
        for k, v in entries.items():
            p[k] = v
        return p

    def _pos(self, k):
        k = tuple(np.atleast_1d(k).astype(int))
        if len(k) != self.dim:
            raise ValueError("index dimension mismatch")
        if max(abs(v) for v in k) > self.bound:
            raise IndexError(f"index {k} outside lattice bound {self.bound}")
        return tuple(v + self.bound for v in k)

    def __getitem__(self, k) -> complex:
        return complex(self.coeffs[self._pos(k)])

    def __setitem__(self, k, value):
        self.coeffs[self._pos(k)] = value

    @property
    def indices(self) -> np.ndarray:
        return lattice(self.dim, self.bound)

    @property
    def flat(self) -> np.ndarray:
        return self.coeffs.reshape(-1)

    def __call__(self, x) -> np.ndarray:
        return eval_poly(self, x)

    def sparsity(self, threshold: float = ZERO_THRESHOLD) -> int:
        return int(np.count_nonzero(np.abs(self.coeffs) > threshold))

    def restrict(self, bound: int) -> "TrigPoly":
        """Copy on a different lattice bound (truncating or zero-padding)."""
        out = TrigPoly.zeros(self.dim, bound)
        r = min(bound, self.bound)
        src = tuple(slice(self.bound - r, self.bound + r + 1) for _ in range(self.dim))
        dst = tuple(slice(bound - r, bound + r + 1) for _ in range(self.dim))
        out.coeffs[dst] = self.coeffs[src]
        return out


def eval_poly(p: TrigPoly, x) -> np.ndarray:
    pts, single = as_points(x, p.dim)
    nz = np.flatnonzero(p.flat)
    out = np.zeros(pts.shape[0], dtype=complex)
    if nz.size == 0:
        return out[0] if single else out
    if nz.size <= (2 * p.bound + 1) * p.dim:
        # few atoms: direct sum beats the dense tensor contraction
        ks = p.indices[nz].astype(float)
        amps = p.flat[nz]
        chunk = max(1, 2 ** 22 // nz.size)
        for s in range(0, pts.shape[0], chunk):
            out[s:s + chunk] = np.exp(2j * np.pi * (pts[s:s + chunk] @ ks.T)) @ amps
        return out[0] if single else out
    # separable evaluation: per-axis exponentials then tensor contraction
    axis = np.arange(-p.bound, p.bound + 1)
    chunk = 4096
    for s in range(0, pts.shape[0], chunk):
        block = pts[s:s + chunk]
        acc = np.broadcast_to(p.coeffs, (block.shape[0],) + p.coeffs.shape)
        for ax in range(p.dim):
            e = np.exp(2j * np.pi * block[:, ax, None] * axis[None, :])
            acc = np.einsum("mk...,mk->m...", acc, e)
        out[s:s + chunk] = acc
    return out[0] if single else out


def fejer_coefficient(k: int, j) -> np.ndarray:
    j = np.asarray(j)
    return np.maximum(0.0, (k - np.abs(j)) / k)


def vdv_coefficient(k: int, j):
    """Fourier coefficient of the de la Vallee Poussin kernel of order ``k``."""
    if k < 1:
        raise ValueError("kernel order must be >= 1")
    val = fejer_coefficient(k, j) + fejer_coefficient(k, np.asarray(j) - k) \
        + fejer_coefficient(k, np.asarray(j) + k)
    return float(val) if np.ndim(val) == 0 else val


def vdv_filter(p: TrigPoly, N: int) -> TrigPoly:
    if N < 1:
        raise ValueError("filter order must be >= 1")
    bound = 2 * N
    q = p.restrict(bound)
    mult = vdv_coefficient(N, np.arange(-bound, bound + 1))
    c = q.coeffs
    for ax in range(p.dim):
        shape = [1] * p.dim
        shape[ax] = -1
        c = c * mult.reshape(shape)
    return TrigPoly(p.dim, bound, c)


def norms(p: TrigPoly) -> tuple[float, float]:
    c = p.flat
    return float(np.linalg.norm(c)), float(np.sum(np.abs(c)))


def to_csv(p: TrigPoly) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"k_{i + 1}" for i in range(p.dim)] + ["re", "im"])
    for k, c in zip(p.indices, p.flat):
        if c != 0:
            w.writerow([int(v) for v in k] + [repr(float(c.real)), repr(float(c.imag))])
    return buf.getvalue()


def from_csv(text: str, bound: int | None = None) -> TrigPoly:
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], [r for r in rows[1:] if r]
    dim = len(header) - 2
    ks = np.array([[int(v) for v in r[:dim]] for r in body], dtype=int).reshape(-1, dim)
    if bound is None:
        bound = int(np.abs(ks).max()) if ks.size else 0
    p = TrigPoly.zeros(dim, bound)
    for k, r in zip(ks, body):
        p[k] = complex(float(r[dim]), float(r[dim + 1]))
    return p
