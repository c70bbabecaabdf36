import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from barron_sampling.trig_poly import (TrigPoly, from_csv, lattice, norms, to_csv,
                                       vdv_coefficient, vdv_filter)


def test_lattice_order_and_size():
    idx = lattice(2, 1)
    assert idx.shape == (9, 2)
    assert idx[0].tolist() == [-1, -1] and idx[1].tolist() == [-1, 0]


def test_eval_examples():
    p = TrigPoly.from_dict(1, 2, {(0,): 3})
    np.testing.assert_allclose(p(np.linspace(-0.5, 0.5, 5)), 3)
    q = TrigPoly.from_dict(1, 1, {(1,): 1})
    assert q(0.5) == pytest.approx(-1)
    r = TrigPoly.from_dict(1, 1, {(1,): 0.5, (-1,): 0.5})
    assert abs(r(0.25)) < 1e-15


def test_dense_and_sparse_paths_agree(rng):
    p = TrigPoly(2, 6, rng.normal(size=(13, 13)) + 1j * rng.normal(size=(13, 13)))
    x = rng.uniform(-0.5, 0.5, size=(50, 2))
    direct = np.exp(2j * np.pi * x @ p.indices.T) @ p.flat
    np.testing.assert_allclose(p(x), direct, atol=1e-11)
    sparse = TrigPoly.from_dict(2, 6, {(1, -2): 1 + 2j, (6, 6): -0.5})
    direct = np.exp(2j * np.pi * x @ sparse.indices.T) @ sparse.flat
    np.testing.assert_allclose(sparse(x), direct, atol=1e-12)


def test_vdv_coefficient_examples():
    assert vdv_coefficient(2, 0) == 1
    assert vdv_coefficient(2, 3) == pytest.approx(0.5)
    assert vdv_coefficient(2, 4) == 0
    np.testing.assert_allclose(vdv_coefficient(3, np.arange(-3, 4)), 1)
    with pytest.raises(ValueError):
        vdv_coefficient(0, 1)


def test_vdv_filter_examples():
    p = TrigPoly.from_dict(1, 4, {(0,): 1})
    f = vdv_filter(p, 4)
    assert f[(0,)] == 1 and f.sparsity() == 1
    q = vdv_filter(TrigPoly.from_dict(1, 3, {(3,): 1}), 2)
    assert q[(3,)] == pytest.approx(0.5)
    with pytest.raises(ValueError):
        vdv_filter(p, 0)


def test_norms_examples():
    assert norms(TrigPoly.from_dict(1, 0, {(0,): 3})) == (3, 3)
    assert norms(TrigPoly.from_dict(1, 2, {(1,): 3, (2,): 4})) == (5, 7)
    assert norms(TrigPoly.zeros(2, 1)) == (0, 0)


polys = st.builds(
    lambda seed, d, b: TrigPoly(d, b, np.random.default_rng(seed).normal(size=(2 * b + 1,) * d)
                                * (np.random.default_rng(seed + 1).random((2 * b + 1,) * d) < 0.4)),
    st.integers(0, 10_000), st.integers(1, 2), st.integers(0, 6))


@given(polys)
def test_parseval(p):
    # a uniform periodic grid with 2B+1 nodes per axis is exact for |p|^2
    m = 2 * p.bound + 1
    axis = np.arange(m) / m - 0.5
    x = np.stack([g.ravel() for g in np.meshgrid(*([axis] * p.dim), indexing="ij")], axis=1)
    quad = np.sqrt(np.mean(np.abs(p(x)) ** 2))
    assert quad == pytest.approx(norms(p)[0], abs=1e-12)


@given(polys, st.integers(1, 4))
def test_filter_twice_on_inner_block(p, N):
    once = vdv_filter(p, N)
    twice = vdv_filter(once, N)
    inner = np.all(np.abs(once.indices) <= N, axis=1)
    np.testing.assert_allclose(twice.flat[inner], once.flat[inner], atol=1e-15)
    # coefficientwise: filter^2 = filter * multiplier
    mult = np.prod(vdv_coefficient(N, once.indices), axis=1)
    np.testing.assert_allclose(twice.flat, once.flat * mult, atol=1e-15)


@given(polys, st.integers(1, 4))
def test_filter_never_creates_nonzeros(p, N):
    f = vdv_filter(p, N)
    assert f.sparsity() <= p.sparsity()


@given(polys)
def test_identity_on_plateau(p):
    N = max(p.bound, 1)
    np.testing.assert_allclose(vdv_filter(p, N).restrict(p.bound).coeffs, p.coeffs, atol=0)


@given(polys)
def test_csv_roundtrip(p):
    q = from_csv(to_csv(p), bound=p.bound)
    np.testing.assert_array_equal(q.coeffs, p.coeffs)


def test_csv_header():
    text = to_csv(TrigPoly.from_dict(2, 1, {(1, -1): 0.5 - 1j}))
    assert text.splitlines()[0] == "k_1,k_2,re,im"
    assert text.splitlines()[1] == "1,-1,0.5,-1.0"
