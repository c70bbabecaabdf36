"""Atomic Fourier sums as exactly representable Barron functions.

A :class:`FourierSum` stores finitely many frequency atoms ``(xi_j, c_j)`` and
represents ``f(x) = Re sum_j c_j exp(2 pi i <xi_j, x>)``.  The weighted atomic
mass ``sum_j (1 + |xi_j|)^sigma |c_j|`` is an upper bound for the Barron norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Weight:
    """Polynomial frequency weight ``w(xi) = (1 + |xi|)^sigma``."""

    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    def __call__(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        if xi.ndim == 0:
            xi = xi[None]
        return (1.0 + np.linalg.norm(xi, axis=-1)) ** self.sigma


@dataclass(frozen=True)
class FourierSum:
    """Finite atomic frequency measure on ``R^dim``.

    Attributes
    ----------
    freqs : (K, dim) float array
    amps : (K,) complex array
    """

    dim: int
    freqs: np.ndarray
    amps: np.ndarray

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        freqs = np.asarray(self.freqs, dtype=float).reshape(-1, self.dim)
        amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        if freqs.shape[0] != amps.shape[0]:
            raise ValueError("freqs and amps have different lengths")
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_atoms(cls, dim: int, atoms) -> "FourierSum":
        atoms = list(atoms)
        if not atoms:
            return cls.zero(dim)
        freqs = np.array([np.atleast_1d(np.asarray(xi, dtype=float)) for xi, _ in atoms])
        amps = np.array([c for _, c in atoms], dtype=complex)
        return cls(dim, freqs, amps)

    @classmethod
    def zero(cls, dim: int) -> "FourierSum":
        return cls(dim, np.zeros((0, dim)), np.zeros(0, dtype=complex))

    @property
    def atoms(self) -> list[tuple[np.ndarray, complex]]:
        return [(self.freqs[j].copy(), complex(self.amps[j])) for j in range(len(self))]

    def __len__(self) -> int:
        return self.amps.shape[0]

    def scaled(self, factor: float) -> "FourierSum":
        return FourierSum(self.dim, self.freqs, self.amps * factor)

    def __call__(self, x) -> np.ndarray:
        return evaluate(self, x)


def as_points(x, dim: int) -> tuple[np.ndarray, bool]:
    """Normalize ``x`` to an (M, dim) array; the flag marks a single point."""
    x = np.asarray(x, dtype=float)
    if dim == 1 and x.ndim <= 1:
        single = x.ndim == 0
        return x.reshape(-1, 1), single
    if x.ndim == 1:
        if x.size != dim:
            raise ValueError(f"point has dimension {x.size}, expected {dim}")
        return x[None, :], True
    if x.ndim != 2 or x.shape[1] != dim:
        raise ValueError(f"points have shape {x.shape}, expected (M, {dim})")
    return x, False


def evaluate_complex(f: FourierSum, x) -> np.ndarray:
    """Complex value ``sum_j c_j e^{2 pi i <xi_j, x>}`` at points ``x`` of shape (M, d)."""
    pts, single = as_points(x, f.dim)
    if len(f) == 0:
        out = np.zeros(pts.shape[0], dtype=complex)
    else:
        phase = 2j * np.pi * (pts @ f.freqs.T)
        out = np.exp(phase) @ f.amps
    return out[0] if single else out


def evaluate(f: FourierSum, x) -> np.ndarray:
    """Real part of the atomic sum.

    ``x`` can be a single point (scalar in 1-D, length-d vector otherwise) or an
    array of shape (M, d); a flat array in 1-D is read as M points.
    """
    val = evaluate_complex(f, x)
    return np.real(val)


def barron_norm_bound(f: FourierSum, w: Weight) -> float:
    if len(f) == 0:
        return 0.0
    return float(np.sum(w(f.freqs) * np.abs(f.amps)))


def holder_norm_bound(f: FourierSum, w: Weight) -> float:
    return float((2.0 * np.pi) ** (w.sigma + 2.0) * barron_norm_bound(f, w))


def affine_pullback(f: FourierSum, a, t0) -> FourierSum:
    """Atoms of ``t -> f(D_a t + t0)``; requires ``0 < |a_i| <= 1``."""
    a = np.broadcast_to(np.asarray(a, dtype=float), (f.dim,))
    t0 = np.broadcast_to(np.asarray(t0, dtype=float), (f.dim,))
    if np.any(a == 0) or np.any(np.abs(a) > 1):
        raise ValueError("dilation entries must satisfy 0 < |a_i| <= 1")
    freqs = f.freqs * a
    amps = f.amps * np.exp(2j * np.pi * (f.freqs @ t0))
    return FourierSum(f.dim, freqs, amps)


def hermitian_symmetrize(f: FourierSum) -> FourierSum:
    """Pair every atom with its mirror so the sum is real-valued.

    Returns the atoms ``(xi, c/2)`` and ``(-xi, conj(c)/2)``, whose sum equals the real
    part of ``f`` pointwise.  Zero frequencies are merged into a single real atom.
    """
    zero = np.all(f.freqs == 0, axis=1)
    c0 = np.real(np.sum(f.amps[zero]))
    fr, am = f.freqs[~zero], f.amps[~zero]
    freqs = np.concatenate([fr, -fr])
    amps = np.concatenate([am / 2, np.conj(am) / 2])
    if np.any(zero):
        freqs = np.concatenate([np.zeros((1, f.dim)), freqs])
        amps = np.concatenate([[c0], amps])
    return FourierSum(f.dim, freqs, amps)


def is_hermitian(f: FourierSum, tol: float = 1e-14) -> bool:
    """True if every atom has a mirror atom with conjugate amplitude."""
    used = np.zeros(len(f), dtype=bool)
    for j in range(len(f)):
        if used[j]:
            continue
        if np.all(f.freqs[j] == 0):
            if abs(f.amps[j].imag) > tol * (1 + abs(f.amps[j])):
                return False
            used[j] = True
            continue
        match = np.where(
            ~used
            & np.all(f.freqs == -f.freqs[j], axis=1)
            & (np.abs(f.amps - np.conj(f.amps[j])) <= tol * (1 + abs(f.amps[j])))
        )[0]
        if match.size == 0:
            return False
        used[j] = True
        used[match[0]] = True
    return True


def to_text(f: FourierSum, sigma: float) -> str:
    lines = [f"{f.dim} {float(sigma)!r}"]
    for xi, c in zip(f.freqs, f.amps):
        fields = [repr(float(v)) for v in xi] + [repr(float(c.real)), repr(float(c.imag))]
        lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"


def from_text(text: str) -> tuple[FourierSum, float]:
    rows = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
    if not rows or len(rows[0]) != 2:
        raise ValueError("header must be 'd sigma'")
    dim, sigma = int(rows[0][0]), float(rows[0][1])
    atoms = []
    for k, row in enumerate(rows[1:], start=2):
        if len(row) != dim + 2:
            raise ValueError(f"line {k}: expected {dim + 2} fields, got {len(row)}")
        vals = [float(v) for v in row]
        atoms.append((vals[:dim], complex(vals[dim], vals[dim + 1])))
    return FourierSum.from_atoms(dim, atoms), sigma


def random_unit_sum(rng: np.random.Generator, dim: int, sigma: float,
                    pairs: tuple[int, int] = (5, 20), tail_index: float = 1.5,
                    scale: float = 2.0, max_radius: float = 32.0) -> FourierSum:
    """Random real-valued atomic sum with weighted mass exactly 1.

    Draws between ``2*pairs[0]`` and ``2*pairs[1]`` atoms (hermitian pairs).  Radii
    follow a Lomax law with the given tail index, truncated at ``max_radius``;
    directions are uniform on the sphere.
    """
    k = int(rng.integers(pairs[0], pairs[1] + 1))
    radii = np.minimum(scale * rng.pareto(tail_index, size=k), max_radius)
    dirs = rng.standard_normal((k, dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    freqs = radii[:, None] * dirs
    amps = (rng.standard_normal(k) + 1j * rng.standard_normal(k)) * rng.exponential(1.0, k)
    f = FourierSum(dim, np.concatenate([freqs, -freqs]),
                   np.concatenate([amps, np.conj(amps)]))
    return f.scaled(1.0 / barron_norm_bound(f, Weight(sigma)))
