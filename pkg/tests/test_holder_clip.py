import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from barron_sampling.holder_recon import grid_plan, interpolate_eval, lebesgue_constant
from barron_sampling.lp_combine import (ClipCombiner, clip_bound, clip_values,
                                        combine_lp_estimator, epsilon_for_budget)
from barron_sampling.global_recon import plan_size


def _fit(fn, m, dim, sigma):
    g = grid_plan(m, dim, sigma)
    return g.fit(fn(g.nodes))


def test_grid_plan_examples():
    g = grid_plan(9, 2, 1.0)
    assert (g.n, g.order, g.size) == (3, 1, 9)
    g = grid_plan(10, 1, 2.5)
    assert (g.n, g.order) == (10, 3)
    with pytest.raises(ValueError):
        grid_plan(1, 2, 1.0)
    assert grid_plan(1000, 3, 1.0).n == 10 and grid_plan(999, 3, 1.0).n == 9


def test_unfitted_grid_raises():
    with pytest.raises(ValueError):
        interpolate_eval(grid_plan(16, 1, 1.0), 0.1)


@pytest.mark.parametrize("sigma", [1.0, 2.0, 3.0])
def test_polynomial_reproduction(sigma, rng):
    q = math.ceil(sigma)
    x = rng.uniform(-0.5, 0.5, size=(500, 2))
    for a in range(q + 1):
        for b in range(q + 1 - a):
            fn = lambda p, a=a, b=b: p[:, 0] ** a * p[:, 1] ** b
            h = _fit(fn, 144, 2, sigma)
            np.testing.assert_allclose(h(x), fn(x), atol=1e-10)
    const = _fit(lambda p: np.full(p.shape[0], 3.5), 20, 1, sigma)
    np.testing.assert_allclose(const(np.linspace(-0.5, 0.5, 11)), 3.5, atol=1e-12)


def test_cosine_sup_error_example():
    h = _fit(lambda p: np.cos(2 * np.pi * p[:, 0]), 64, 1, 2.0)
    x = np.linspace(-0.5, 0.5, 100_001)
    err = np.max(np.abs(h(x) - np.cos(2 * np.pi * x)))
    assert err <= 10 * (1 / 64) ** 2 * (2 * np.pi) ** 3 / 6


@pytest.mark.parametrize("sigma", [1.0, 2.0, 3.0])
def test_empirical_order(sigma):
    f = lambda p: math.sqrt(2) * np.cos(2 * np.pi * 3 * p[:, 0])
    x = np.linspace(-0.5, 0.5, 200_001)
    errs = []
    for n in (16, 32, 64, 128):
        h = _fit(f, n, 1, sigma)
        errs.append(np.max(np.abs(h(x) - f(x[:, None]))))
    q = math.ceil(sigma)
    for a, b in zip(errs, errs[1:]):
        assert a / b >= 2 ** (min(sigma, q + 1) - 0.3)


@settings(max_examples=30)
@given(st.integers(0, 10_000), st.sampled_from([1.0, 2.0, 3.0]))
def test_lebesgue_boundedness(seed, sigma):
    rng = np.random.default_rng(seed)
    g = grid_plan(81, 2, sigma)
    vals = rng.normal(size=g.size)
    h = g.fit(vals)
    x = rng.uniform(-0.5, 0.5, size=(2000, 2))
    assert np.max(np.abs(h(x))) <= lebesgue_constant(g.order, 2) * np.max(np.abs(vals))


def test_lebesgue_values():
    assert lebesgue_constant(1) == pytest.approx(1.0)
    assert lebesgue_constant(2) == pytest.approx(1.25, rel=1e-6)
    assert lebesgue_constant(2, 2) == pytest.approx(1.5625, rel=1e-6)


def test_clip_examples():
    assert clip_values(5, 0, 1) == 1 and clip_values(-5, 0, 1) == -1 and clip_values(0.5, 0, 1) == 0.5
    c = ClipCombiner(lambda x: np.full(np.shape(x), 5.0), lambda x: np.zeros(np.shape(x)), 1.0)
    np.testing.assert_array_equal(c(np.zeros(3)), 1.0)
    with pytest.raises(ValueError):
        ClipCombiner(None, None, -0.1)


def test_clip_bound_examples():
    assert clip_bound(0.01, 0.1, 2) == pytest.approx(0.02)
    assert clip_bound(0.01, 0.1, math.inf) == pytest.approx(0.2)
    assert clip_bound(0.01, 0.1, 4) == pytest.approx(2 * 0.1 * math.sqrt(0.1))
    with pytest.raises(ValueError):
        clip_bound(0.1, 0.1, 1.5)


def _discrete_lp(v, p):
    return np.max(np.abs(v)) if math.isinf(p) else np.mean(np.abs(v) ** p) ** (1 / p)


@settings(max_examples=200)
@given(st.integers(0, 2 ** 32 - 1), st.floats(1e-3, 1.0), st.floats(1e-3, 1.0))
def test_clipping_bound_on_grid(seed, eps, delta):
    rng = np.random.default_rng(seed)
    f = rng.normal(size=256)
    e = rng.normal(size=256) * (rng.random(256) < 0.2)
    g = f + e * eps / max(_discrete_lp(e, 2), 1e-300)
    h = f + rng.uniform(-delta, delta, 256)
    F = clip_values(g, h, delta)
    assert np.all(np.abs(F - h) <= delta * (1 + 1e-12))
    assert np.all(np.abs(f - F) <= np.abs(f - g) + 1e-12)
    assert np.all(np.abs(f - F) <= 2 * delta * (1 + 1e-12))
    inside = np.abs(g - h) < delta
    np.testing.assert_array_equal(F[inside], g[inside])
    for p in (2, 3, 4, 8, math.inf):
        assert _discrete_lp(f - F, p) <= clip_bound(eps, delta, p) * (1 + 1e-12)


def test_epsilon_for_budget_monotone():
    eps = epsilon_for_budget(2000, 1.0, 1, kappa0=0.02)
    assert plan_size(eps, 1.0, 1, 0.02) <= 2000 < plan_size(eps * (1 - 1e-6), 1.0, 1, 0.02)


def test_split_budget():
    est = combine_lp_estimator(1000, 4.0, 1.0, 1, kappa0=0.02)
    assert est.grid.size == 500 and est.plan.total_samples <= 500
    assert est.points.shape == (est.total_samples, 1)
    with pytest.raises(ValueError):
        combine_lp_estimator(1000, 1.5, 1.0, 1)
