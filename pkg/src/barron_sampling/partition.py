"""Dyadic rectangles accumulating at the boundary of the cube ``[-1/2, 1/2]^d``.

Along each axis the half-line ``[0, 1/2)`` is cut at ``a_n = (1 - 2^-n) / 2`` into
intervals ``[a_n, a_{n+1})``; negative coordinates use the mirrored intervals
``[-a_{n+1}, -a_n)``.  Every point of the open cube lies in exactly one box.  Each
box carries an affine map onto ``[-1/4, 1/4]^d`` whose inverse maps the whole cube
into itself.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np


def endpoint(n: int) -> float:
    return 0.5 * (1.0 - 2.0 ** (-int(n)))


def _center(n: int) -> float:
    return endpoint(n) + 2.0 ** (-(int(n) + 3))


@dataclass(frozen=True)
class CellIndex:
    n: tuple
    theta: tuple  # entries +1 / -1

    def __post_init__(self):
        n = tuple(int(v) for v in np.atleast_1d(self.n))
        th = tuple(int(v) for v in np.atleast_1d(self.theta))
        if len(n) != len(th):
            raise ValueError("n and theta must have equal length")
        if any(v < 0 for v in n) or any(t not in (1, -1) for t in th):
            raise ValueError("n must be nonnegative and theta in {+1, -1}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "theta", th)

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def level(self) -> int:
        return sum(self.n)

    def label(self) -> str:
        signs = "".join("p" if t > 0 else "m" for t in self.theta)
        return "n" + "_".join(str(v) for v in self.n) + "_" + signs


@dataclass(frozen=True)
class Cell:
    """Half-open box ``prod [lower_i, upper_i)`` with ``Psi(t) = a * t + b``."""

    index: CellIndex
    lower: np.ndarray
    upper: np.ndarray
    a: np.ndarray
    b: np.ndarray

    @property
    def dim(self) -> int:
        return self.index.dim

    @property
    def volume(self) -> float:
        return 2.0 ** (-2 * self.dim - self.index.level)

    def forward(self, x) -> np.ndarray:
        """Cell map onto the inner cube."""
        return (np.asarray(x, dtype=float) - self.b) / self.a

    def inverse(self, t) -> np.ndarray:
        return self.a * np.asarray(t, dtype=float) + self.b

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1, self.dim)
        return np.all((x >= self.lower) & (x < self.upper), axis=1)


def cell(idx: CellIndex) -> Cell:
    lo, hi, a, b = [], [], [], []
    for n, th in zip(idx.n, idx.theta):
        an, an1 = endpoint(n), endpoint(n + 1)
        scale = 2.0 ** (-(n + 1))
        if th > 0:
            lo.append(an), hi.append(an1)
        else:
            lo.append(-an1), hi.append(-an)
        a.append(th * scale)
        b.append(th * _center(n))
    return Cell(idx, np.array(lo), np.array(hi), np.array(a), np.array(b))


def locate(x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cell levels and signs of points ``x`` (shape (M, d)).

    Returns ``(n, theta, valid)``; ``valid`` is False for points with a coordinate
    of modulus 1/2 or outside the cube.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    theta = np.where(x >= 0, 1, -1)
    u = 1.0 - 2.0 * np.abs(x)
    valid = np.all((u > 0) & np.isfinite(x), axis=1)
    mant, expo = np.frexp(np.where(u > 0, u, 1.0))
    # positive side: a_n <= x < a_{n+1}  <=>  2^-(n+1) < u <= 2^-n
    level = -expo + np.where((x >= 0) & (mant == 0.5), 1, 0)
    level = np.maximum(level, 0)
    return level.astype(int), theta.astype(int), valid


def active_set(epsilon: float, dim: int) -> list[tuple]:
    """All ``n`` with ``epsilon * 2^(|n|_1 / 4) < 1``, decided in exact arithmetic."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    e4 = Fraction(float(epsilon)) ** 4
    kmax = -1
    while e4 * 2 ** (kmax + 1) < 1:
        kmax += 1
    out = []
    for n in itertools.product(range(kmax + 1), repeat=dim):
        if sum(n) <= kmax:
            out.append(tuple(n))
    out.sort(key=lambda v: (sum(v), v))
    return out


def is_active(n, epsilon: float) -> bool:
    k = int(sum(n))
    return Fraction(float(epsilon)) ** 4 * 2 ** k < 1


def budget(n, epsilon: float, lam: float, kappa0: float = 1.0,
           log_power: float = 4.0) -> int:
    if not is_active(n, epsilon):
        raise ValueError(f"index {tuple(n)} is not active for epsilon={epsilon}")
    t = epsilon * 2.0 ** (sum(n) / 4.0)
    val = kappa0 * t ** (-1.0 / lam) * math.log(math.e + 1.0 / t) ** log_power
    return max(1, math.ceil(val))


def budget_highprec(n, epsilon: float, lam: float, kappa0: float = 1.0,
                    log_power: float = 4.0, digits: int = 40) -> int:
    """Same formula in ``digits``-digit arithmetic (guards ceiling flips)."""
    with mpmath.workdps(digits):
        t = mpmath.mpf(epsilon) * mpmath.power(2, mpmath.mpf(sum(n)) / 4)
        val = (mpmath.mpf(kappa0) * mpmath.power(t, -1 / mpmath.mpf(lam))
               * mpmath.log(mpmath.e + 1 / t) ** mpmath.mpf(log_power))
        return max(1, int(mpmath.ceil(val)))


def signs(dim: int):
    return list(itertools.product((1, -1), repeat=dim))


def cells_for(levels, dim: int) -> list[CellIndex]:
    return [CellIndex(n, th) for n in levels for th in signs(dim)]


def tail_volume(dim: int, max_level: int) -> float:
    """Total volume of all cells with ``|n|_1 > max_level``.

    The level ``|n|_1`` of a uniformly random point is negative binomial (failures
    before ``dim`` successes of a fair coin), so the tail is the probability of at
    most ``dim - 1`` successes in ``max_level + dim`` tosses.
    """
    total = max_level + dim
    tail = sum(Fraction(math.comb(total, j), 2 ** total) for j in range(dim))
    return float(tail)
