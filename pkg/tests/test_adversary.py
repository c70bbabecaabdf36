import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from barron_sampling.adversary import (BumpProfile, bump_barron_bound, bump_sum_build,
                                       cosine_constant, cosine_family, fooling_function, index_set,
                                       linear_avg_residual, occupied_cells)
from barron_sampling.barron_core import Weight, barron_norm_bound
from barron_sampling.quadrature import composite_rule, tensor_rule

PROF = BumpProfile.for_smoothness(1, 1.0)


def test_profile_support_and_transform():
    t = np.linspace(-0.2, 1.2, 20001)
    v = PROF(t)
    assert v.min() >= 0 and np.all(v[(t <= PROF.margin) | (t >= 1 - PROF.margin)] == 0)
    x, w = composite_rule(PROF.knots, 12)
    for eta in (0.0, 1.0, 3.3):
        quad = np.sum(w * PROF(x) * np.exp(-2j * np.pi * eta * x))
        assert PROF.fourier(eta) == pytest.approx(quad, abs=1e-13)
    for p in (1.0, 2.0, 3.0):
        assert PROF.norm_1d(p) == pytest.approx(np.sum(w * PROF(x) ** p) ** (1 / p), rel=1e-12)
    assert PROF.norm_1d(math.inf) == pytest.approx(PROF(np.array([0.5]))[0])


def test_bump_sum_examples():
    b = bump_sum_build(2, [[0], [1]], [1, -1], PROF)
    assert b.lp_norm(2) == pytest.approx(PROF.norm_1d(2))
    assert b(np.array([0.0]))[0] == 0 and b(np.array([-0.5]))[0] == 0
    x = np.linspace(-0.5, 0.5, 1001)
    np.testing.assert_array_equal(b.negated()(x), -b(x))
    with pytest.raises(ValueError):
        bump_sum_build(2, [[0], [0]], [1, 1], PROF)
    with pytest.raises(ValueError):
        bump_sum_build(2, [[2]], [1], PROF)


@pytest.mark.parametrize("p", [1.0, 2.0, 4.0, math.inf])
def test_exact_lp_norm_matches_quadrature(p):
    prof = BumpProfile.for_smoothness(2, 1.0)
    b = bump_sum_build(3, [[0, 0], [1, 2], [2, 1]], [1, -1, 1], prof)
    if math.isinf(p):
        t = np.linspace(-0.5, 0.5, 601)
        grid = np.stack([g.ravel() for g in np.meshgrid(t, t, indexing="ij")], axis=1)
        assert np.max(np.abs(b(grid))) == pytest.approx(b.lp_norm(p), rel=1e-6)
        return
    rule = composite_rule(b.breakpoints(), 12)
    x, w = tensor_rule([rule, rule])
    assert np.sum(w * np.abs(b(x)) ** p) ** (1 / p) == pytest.approx(b.lp_norm(p), rel=1e-10)


def test_barron_bound_properties(rng):
    single = [bump_barron_bound(bump_sum_build(8, [[3]], [s], PROF), 1.0).value for s in (1, -1)]
    assert single[0] == pytest.approx(single[1], rel=1e-12)
    cells = np.arange(0, 16, 2)[:, None]
    th = rng.choice([-1.0, 1.0], size=8)
    b16 = bump_barron_bound(bump_sum_build(16, cells, th, PROF), 1.0).value
    b32 = bump_barron_bound(bump_sum_build(32, 2 * cells, th, PROF), 1.0).value
    assert 2 / 2 <= b32 / b16 <= 2 * 2
    more = np.arange(16)[:, None]
    th2 = rng.choice([-1.0, 1.0], size=16)
    b_more = bump_barron_bound(bump_sum_build(16, more, th2, PROF), 1.0).value
    assert b_more / b16 <= math.sqrt(2) * 1.2
    # a sup-norm bound is implied by the Fourier bound
    b = bump_sum_build(16, cells, th, PROF)
    assert bump_barron_bound(b, 1.0).value >= b.lp_norm(math.inf)


def test_fooling_examples():
    c = fooling_function(np.array([[-0.25], [0.25]]), 1.0, 2.0)
    assert c.N == 4 and c.lambda_hit >= 2 and c.vanishing
    empty = fooling_function(np.zeros((0, 1)), 1.0, 2.0)
    assert empty.lambda_hit == empty.N ** 1 and empty.vanishing
    assert fooling_function(np.array([[0.1]]), 1.0, 3.0).lambda_hit == 1
    with pytest.raises(ValueError):
        fooling_function(np.array([[0.7]]), 1.0, 2.0)


@settings(max_examples=20)
@given(st.integers(0, 10_000), st.integers(1, 60), st.sampled_from([(1, 2.0), (1, 4.0), (2, 2.0)]))
def test_fooling_vanishes_and_is_normalized(seed, M, case):
    dim, p = case
    pts = np.random.default_rng(seed).uniform(-0.5, 0.5, size=(M, dim))
    c = fooling_function(pts, 1.0, p, dim=dim, seed=seed)
    assert np.all(c.function(pts) == 0.0)
    assert c.barron_bound <= 1.0 + 1e-12
    assert c.lp_norm > 0
    occ = occupied_cells(pts, c.N, dim)
    assert c.N ** dim >= 2 * M and np.sum(~occ) >= c.N ** dim / 2
    assert np.all(~occ[tuple(c.function.cells.T)])


def test_certificate_rate():
    ms = np.array([8, 32, 128])
    norms = [fooling_function(np.random.default_rng(0).uniform(-0.5, 0.5, (M, 1)), 1.0, 2.0).lp_norm
             for M in ms]
    slope = np.polyfit(np.log(ms), np.log(norms), 1)[0]
    assert abs(slope + 1.5) <= 0.25


def test_cosine_family_examples():
    one = cosine_family([0.0])
    assert barron_norm_bound(one, Weight(1.0)) == 1
    assert barron_norm_bound(cosine_family([1.0]), Weight(1.0)) == pytest.approx(2 * math.sqrt(2))
    for eta in index_set(60.0, 1.0, 2):
        f = cosine_family(eta)
        bound = cosine_constant(2, 1.0) * (1 + np.max(np.abs(eta))) ** 1.0
        assert barron_norm_bound(f, Weight(1.0)) <= bound + 1e-12


def test_cosine_orthonormality():
    etas = [e for e in np.ndindex(3, 3)]
    axis = (np.arange(64) + 0.5) / 64 - 0.5
    x = np.stack([g.ravel() for g in np.meshgrid(axis, axis, indexing="ij")], axis=1)
    F = np.stack([np.real(cosine_family(np.array(e, float))(x)) for e in etas], axis=1)
    np.testing.assert_allclose(F.T @ F / x.shape[0], np.eye(len(etas)), atol=1e-10)


def test_linear_residual_examples():
    gamma, sigma = 40.0, 1.0
    etas = index_set(gamma, sigma, 1)
    own = [lambda x, e=e: np.real(cosine_family(e.astype(float))(x)) for e in etas]
    assert linear_avg_residual(own, gamma, sigma) <= 1e-10
    assert linear_avg_residual([], gamma, sigma) == pytest.approx(1 / gamma)
    r = len(etas) // 4
    legendre = [lambda x, k=k: np.polynomial.legendre.Legendre.basis(k)(2 * x[:, 0]) for k in range(r)]
    assert linear_avg_residual(legendre, gamma, sigma) >= 1 / (2 * gamma) - 1e-6
    with pytest.raises(ValueError):
        linear_avg_residual([], 0.5, sigma)
