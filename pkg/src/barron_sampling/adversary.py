"""Functions that no sampling algorithm can tell apart from zero.

Bump sums place disjoint B-spline bumps in the micro-cells of a uniform grid that
contain no sample point.  Their Barron norm is bounded through the closed-form
spline transform, so after normalization they are admissible targets with an
exactly known Lp norm.  A second construction measures how far any fixed linear
subspace stays from a family of orthonormal cosines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy.interpolate import BSpline

from .barron_core import FourierSum, as_points
from .cutoff import spline_order
from .quadrature import composite_rule, gauss_legendre, tensor_rule


@dataclass(frozen=True)
class BumpProfile:
    """B-spline of the given order dilated onto ``[margin, 1 - margin]``."""

    order: int
    margin: float = 0.05

    @classmethod
    def for_smoothness(cls, dim: int, sigma: float, margin: float = 0.05) -> "BumpProfile":
        return cls(spline_order(dim, sigma), margin)

    @property
    def dilation(self) -> float:
        return self.order / (1 - 2 * self.margin)

    @cached_property
    def _basis(self) -> BSpline:
        r = self.order
        return BSpline.basis_element(np.arange(r + 1) - r / 2, extrapolate=False)

    @property
    def knots(self) -> np.ndarray:
        r = self.order
        return 0.5 + (np.arange(r + 1) - r / 2) / self.dilation

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        u = self.dilation * (t - 0.5)
        out = np.zeros(u.shape)
        inside = np.abs(u) < self.order / 2
        if np.any(inside):
            out[inside] = self._basis(u[inside])
        return np.maximum(out, 0.0)

    def fourier(self, eta) -> np.ndarray:
        eta = np.asarray(eta, dtype=float)
        s = self.dilation
        return (1 / s) * np.sinc(eta / s) ** self.order * np.exp(-1j * np.pi * eta)

    def abs_fourier(self, eta) -> np.ndarray:
        s = self.dilation
        return (1 / s) * np.abs(np.sinc(np.asarray(eta, dtype=float) / s)) ** self.order

    def envelope_constant(self) -> float:
        """``C`` with ``|fourier(eta)| <= C |eta|^(-order)``."""
        s = self.dilation
        return (1 / s) * (s / np.pi) ** self.order

    def norm_1d(self, p: float) -> float:
        """Exact Lp norm (Gauss-Legendre on the knot panels of a piecewise polynomial)."""
        if math.isinf(p):
            return float(self(np.array([0.5]))[0])
        deg = (self.order - 1) * p
        order = int(math.ceil((deg + 1) / 2)) + 1 if float(p).is_integer() else 40
        nodes, weights = composite_rule(self.knots, order)
        return float(np.sum(weights * self(nodes) ** p) ** (1 / p))


@dataclass
class BumpSum:
    """``amplitude * sum_{n in cells} theta_n * prod_i bump(N (x_i + 1/2) - n_i)``."""

    dim: int
    N: int
    cells: np.ndarray  # (K, dim) integer grid indices
    theta: np.ndarray  # (K,) signs
    profile: BumpProfile
    amplitude: float = 1.0
    _grid: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.cells = np.asarray(self.cells, dtype=int).reshape(-1, self.dim)
        self.theta = np.asarray(self.theta, dtype=float).reshape(-1)
        if self.cells.shape[0] != self.theta.shape[0]:
            raise ValueError("one sign per cell required")
        if self.cells.size and (self.cells.min() < 0 or self.cells.max() >= self.N):
            raise ValueError("cell index out of range")
        if len({tuple(c) for c in self.cells}) != self.cells.shape[0]:
            raise ValueError("cells must be distinct")
        grid = np.zeros((self.N,) * self.dim)
        if self.cells.size:
            grid[tuple(self.cells.T)] = self.theta
        self._grid = grid

    @property
    def count(self) -> int:
        return self.cells.shape[0]

    def sign_grid(self) -> np.ndarray:
        return self._grid

    def with_theta(self, theta) -> "BumpSum":
        return replace(self, theta=np.asarray(theta, dtype=float), _grid=None)

    def negated(self) -> "BumpSum":
        return self.with_theta(-self.theta)

    def scaled(self, amplitude: float) -> "BumpSum":
        return replace(self, amplitude=float(amplitude), _grid=None)

    def __call__(self, x) -> np.ndarray:
        pts, single = as_points(x, self.dim)
        u = self.N * (pts + 0.5)
        idx = np.clip(np.floor(u).astype(int), 0, self.N - 1)
        local = u - idx
        vals = self._grid[tuple(idx.T)] * np.prod(self.profile(local), axis=1)
        out = self.amplitude * vals
        return out[0] if single else out

    def lp_norm(self, p: float) -> float:
        if self.count == 0:
            return 0.0
        if math.isinf(p):
            return abs(self.amplitude) * self.profile.norm_1d(p) ** self.dim
        return (abs(self.amplitude) * self.profile.norm_1d(p) ** self.dim
                * self.N ** (-self.dim / p) * self.count ** (1 / p))

    def breakpoints(self) -> np.ndarray:
        """Per-axis points where the sum fails to be polynomial."""
        k = self.profile.knots
        base = (np.arange(self.N)[:, None] + k[None, :]).ravel() / self.N - 0.5
        return np.unique(np.concatenate([base, np.linspace(-0.5, 0.5, self.N + 1)]))


def bump_sum_build(N: int, cells, theta, profile: BumpProfile, dim: int | None = None,
                   amplitude: float = 1.0) -> BumpSum:
    cells = np.asarray(cells, dtype=int)
    if dim is None:
        dim = cells.shape[1] if cells.ndim == 2 else 1
    return BumpSum(dim, N, cells.reshape(-1, dim), theta, profile, amplitude)


@dataclass
class BarronBound:
    value: float
    head: float
    tail: float
    constant: float  # value / (N^sigma sqrt(count))


def _folded(profile: BumpProfile, t: np.ndarray, power: float, N: float | None,
            L: int) -> tuple[np.ndarray, float]:
    """``sum_{|l| <= L} w(t + l) |fourier(t + l)|`` on ``t`` in [0,1) and a uniform tail.

    ``w(u) = (1 + N|u|)^power`` when ``N`` is given, otherwise ``|u|^power``.
    """
    shifts = np.arange(-L, L + 1)
    u = t[:, None] + shifts[None, :]
    au = np.abs(u)
    w = (1 + N * au) ** power if N is not None else au ** power
    head = np.sum(w * profile.abs_fourier(u), axis=1)
    q = profile.order - power
    c = profile.envelope_constant()
    if N is not None:
        c *= (1.0 / L + N) ** power
    tail = c * (2 * L ** (1 - q) / (q - 1) + L ** (-q))
    return head, float(tail)


def bump_barron_bound(b: BumpSum, sigma: float, radius: int | None = None,
                      resolution: int | None = None) -> BarronBound:
    """Upper bound for ``int (1 + |xi|)^sigma |psi^(xi)| d xi``.

    With ``eta = xi / N`` the integrand is ``|g(eta)| (1 + N|eta|)^sigma |bump^(eta)|``
    where ``g`` is the 1-periodic sign polynomial.  Folding onto the unit cell gives
    ``int_[0,1)^d |g| G`` with ``G`` the periodized weight, summed over shifts
    ``|l| <= radius`` plus a closed-form sinc tail.  In more than one dimension the
    Euclidean weight is majorized by ``c (1 + N^sigma sum_i |eta_i|^sigma)``, which
    separates across axes.
    """
    if b.count == 0:
        return BarronBound(0.0, 0.0, 0.0, 0.0)
    d, N = b.dim, b.N
    L = radius or int(math.ceil(8 * b.profile.dilation))
    K = resolution or max(64, 16 * N)
    t = np.arange(K) / K
    sign_hat = np.fft.fftn(np.pad(b.sign_grid(), [(0, K - N)] * d))
    absg = np.abs(sign_hat)
    if d == 1:
        head_w, tail_w = _folded(b.profile, t, sigma, N, L)
        head = float(np.mean(absg * head_w))
        total = float(np.mean(absg * (head_w + tail_w)))
    else:
        c_sig = max(1.0, 2.0 ** (sigma - 1))
        c_pow = d ** max(0.0, sigma / 2 - 1)
        g0, t0 = _folded(b.profile, t, 0.0, None, L)
        gs, ts = _folded(b.profile, t, sigma, None, L)

        def combine(a0, asg):
            out = np.ones((K,) * d)
            for ax in range(d):
                out = out * a0.reshape([-1 if i == ax else 1 for i in range(d)])
            acc = out
            for ax in range(d):
                term = np.ones((K,) * d)
                for j in range(d):
                    vec = asg if j == ax else a0
                    term = term * vec.reshape([-1 if i == j else 1 for i in range(d)])
                acc = acc + N ** sigma * c_pow * term
            return c_sig * acc

        head = float(np.mean(absg * combine(g0, gs)))
        total = float(np.mean(absg * combine(g0 + t0, gs + ts)))
    value = abs(b.amplitude) * total
    head *= abs(b.amplitude)
    tail = value - head
    if tail > 0.1 * head:
        raise ValueError("tail exceeds 10% of the head; increase radius")
    const = value / (N ** sigma * math.sqrt(b.count)) if b.amplitude else 0.0
    return BarronBound(value, head, tail, const)


@dataclass
class FoolingCertificate:
    function: BumpSum
    barron_bound: float
    lp_norm: float
    vanishing: bool
    N: int
    lambda_hit: int
    M: int
    p: float
    sigma: float
    rate_constant: float
    bound_constant: float

    def record(self) -> dict:
        return {"M": self.M, "N": self.N, "lambda_hit": self.lambda_hit,
                "barron_bound": self.barron_bound, "lp_norm": self.lp_norm}


def occupied_cells(points, N: int, dim: int) -> np.ndarray:
    """Boolean grid of micro-cells that contain a point (same arithmetic as evaluation)."""
    occ = np.zeros((N,) * dim, dtype=bool)
    if len(points):
        pts, _ = as_points(points, dim)
        idx = np.clip(np.floor(N * (pts + 0.5)).astype(int), 0, N - 1)
        occ[tuple(idx.T)] = True
    return occ


def fooling_function(points, sigma: float, p: float, profile: BumpProfile | None = None,
                     dim: int | None = None, seed: int = 0) -> FoolingCertificate:
    """Normalized bump sum on the micro-cells avoided by ``points``."""
    pts = np.asarray(points, dtype=float)
    if dim is None:
        dim = 1 if pts.ndim <= 1 else pts.shape[1]
    pts = pts.reshape(-1, dim)
    M = pts.shape[0]
    if M and np.any(np.abs(pts) > 0.5):
        raise ValueError("points must lie in the cube")
    profile = profile or BumpProfile.for_smoothness(dim, sigma)
    N = max(1, math.ceil((2 * M) ** (1.0 / dim) - 1e-12))
    while N ** dim < 2 * M:
        N += 1
    free = np.argwhere(~occupied_cells(pts, N, dim))
    rng = np.random.default_rng(seed)
    if p > 2:
        free = free[[rng.integers(free.shape[0])]]
    theta = rng.choice([-1.0, 1.0], size=free.shape[0])
    bump = BumpSum(dim, N, free, theta, profile, 1.0)
    raw = bump_barron_bound(bump, sigma).value
    gamma = bump.scaled(1.0 / raw)
    bound = bump_barron_bound(gamma, sigma).value
    if bound > 1.0:
        gamma = gamma.scaled(gamma.amplitude / bound)
        bound = bump_barron_bound(gamma, sigma).value
    vanishing = bool(np.all(gamma(pts) == 0.0)) if M else True
    norm = gamma.lp_norm(p)
    expo = 1.0 / max(2.0, p) + sigma / dim
    return FoolingCertificate(gamma, bound, norm, vanishing, N, gamma.count, M, p, sigma,
                              norm * max(M, 1) ** expo,
                              raw / (N ** sigma * math.sqrt(gamma.count)))


def cosine_family(eta, sigma: float | None = None) -> FourierSum:
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    d = eta.size
    if np.all(eta == 0):
        return FourierSum.from_atoms(d, [(np.zeros(d), 1.0)])
    c = math.sqrt(2) / 2
    return FourierSum.from_atoms(d, [(eta, c), (-eta, c)])


def cosine_constant(dim: int, sigma: float) -> float:
    """``C1`` with ``||f_eta|| <= C1 (1 + |eta|_inf)^sigma`` for the atomic norm bound."""
    return math.sqrt(2) * dim ** (sigma / 2)


def index_set(gamma: float, sigma: float, dim: int, c1: float | None = None) -> np.ndarray:
    c1 = cosine_constant(dim, sigma) if c1 is None else c1
    kmax = (gamma / c1) ** (1.0 / sigma) - 1
    if kmax < 0:
        return np.zeros((0, dim), dtype=int)
    K = int(math.floor(kmax + 1e-12))
    axis = np.arange(K + 1)
    grids = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def linear_avg_residual(basis, gamma: float, sigma: float, dim: int = 1,
                        c1: float | None = None, nodes_per_axis: int | None = None) -> float:
    """Mean over the cosine index set of ``||f/gamma - P_V (f/gamma)||_2``.

    ``basis`` is a list of callables on (M, dim) arrays; they are orthonormalized
    with respect to a tensor Gauss-Legendre rule.
    """
    etas = index_set(gamma, sigma, dim, c1)
    if etas.shape[0] == 0:
        raise ValueError("empty cosine index set for this gamma")
    kmax = int(etas.max())
    per_axis = nodes_per_axis or max(64, 2 * kmax + 64)
    panels = max(1, per_axis // 16)
    rule = composite_rule(np.linspace(-0.5, 0.5, panels + 1), 16)
    x, w = tensor_rule([rule] * dim)
    sw = np.sqrt(w)
    if len(basis):
        B = np.stack([np.real(np.asarray(g(x), dtype=float)) for g in basis], axis=1) * sw[:, None]
        u, s, _ = np.linalg.svd(B, full_matrices=False)
        Q = u[:, s > s[0] * 1e-10] if s.size and s[0] > 0 else np.zeros((x.shape[0], 0))
    else:
        Q = np.zeros((x.shape[0], 0))
    res = []
    for eta in etas:
        fv = np.real(cosine_family(eta)(x)) * sw / gamma
        r = fv - Q @ (Q.T @ fv)
        res.append(np.linalg.norm(r))
    return float(np.mean(res))
