import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from barron_sampling.l1_solver import (MeasurementSystem, ToleranceConfig, bpdn_solve,
                                       coherence_diag, soft_threshold)

cp = pytest.importorskip("cvxpy")


def _system(seed, bound, m, d=1):
    rng = np.random.default_rng(seed)
    return MeasurementSystem(d, bound, rng.uniform(-0.5, 0.5, size=(m, d))), rng


def _cvx(sys, y, eta):
    z = cp.Variable(sys.n, complex=True)
    prob = cp.Problem(cp.Minimize(cp.norm1(z)),
                      [cp.norm(y - sys.matrix @ z, 2) <= eta * np.sqrt(sys.m)])
    prob.solve()
    return z.value, prob.value


def test_zero_data():
    sys, _ = _system(0, 4, 6)
    rep = bpdn_solve(sys, np.zeros(6), 0.0)
    assert rep.converged and rep.objective == 0 and np.all(rep.solution == 0)


def test_one_sparse_recovery():
    sys, _ = _system(0, 8, 12)
    truth = np.zeros(sys.n, dtype=complex)
    truth[8 + 3] = 1.0
    rep = bpdn_solve(sys, sys.matrix @ truth, 0.0)
    assert rep.converged
    assert np.linalg.norm(rep.solution - truth) <= 1e-4
    # no other 1-sparse candidate reproduces the data
    A, y = sys.matrix, sys.matrix @ truth
    for j in range(sys.n):
        c = np.vdot(A[:, j], y) / np.vdot(A[:, j], A[:, j])
        if j != 11:
            assert np.linalg.norm(y - c * A[:, j]) > 1e-3


def test_square_system_matches_solve():
    sys, rng = _system(4, 4, 9)
    y = rng.normal(size=9) + 1j * rng.normal(size=9)
    rep = bpdn_solve(sys, y, 0.0)
    np.testing.assert_allclose(rep.solution, np.linalg.solve(sys.matrix, y), atol=1e-6)


@pytest.mark.parametrize("seed,eta", [(1, 0.05), (2, 0.2), (3, 0.5)])
def test_matches_cvxpy(seed, eta):
    sys, rng = _system(seed, 24, 30)
    y = rng.normal(size=30)
    rep = bpdn_solve(sys, y, eta)
    z, val = _cvx(sys, y, eta)
    assert rep.converged
    assert rep.objective == pytest.approx(val, rel=1e-4, abs=1e-6)
    assert rep.residual <= eta * np.sqrt(30) + 1e-8 * (1 + np.linalg.norm(y))


def test_negative_eta():
    sys, _ = _system(0, 2, 4)
    with pytest.raises(ValueError):
        bpdn_solve(sys, np.ones(4), -1.0)


def test_infeasible_reported():
    sys, rng = _system(5, 2, 40)
    rep = bpdn_solve(sys, rng.normal(size=40), 0.0)
    assert not rep.converged and "empty" in rep.message


@settings(max_examples=15)
@given(st.integers(0, 1000), st.floats(0.0, 0.3), st.floats(0.01, 100.0))
def test_feasibility_sandwich_and_scaling(seed, eta, c):
    sys, rng = _system(seed, 8, 24)
    truth = np.zeros(sys.n, dtype=complex)
    truth[rng.choice(sys.n, 2, replace=False)] = rng.normal(size=2)
    y = sys.matrix @ truth + eta * rng.normal(size=24) * 0.5
    tol = ToleranceConfig()
    rep = bpdn_solve(sys, y, eta, tol)
    if not rep.converged:
        return
    radius = eta * np.sqrt(sys.m)
    assert rep.residual <= radius + tol.feas_tol * (1 + np.linalg.norm(y))
    if np.linalg.norm(sys.matrix @ truth - y) <= radius:
        assert rep.objective <= np.sum(np.abs(truth)) + tol.opt_tol * (1 + rep.objective)
    ls = np.linalg.lstsq(sys.matrix, y, rcond=None)[0]
    if np.linalg.norm(sys.matrix @ ls - y) <= radius:
        assert rep.objective <= np.sum(np.abs(ls)) + tol.opt_tol * (1 + rep.objective)
    scaled = bpdn_solve(sys, c * y, c * eta, tol)
    np.testing.assert_allclose(scaled.solution, c * rep.solution,
                               atol=1e-8 * np.max(np.abs(c * rep.solution)))


def test_noiseless_sparse_success_rate():
    from barron_sampling.harness import sparse_trial, trial_rng
    for s in (1, 3):
        ok = sum(sparse_trial(trial_rng(7, s, t), s)[0] for t in range(40))
        assert ok >= 38


def test_coherence_examples():
    one = MeasurementSystem(1, 8, np.array([[0.13]]))
    assert coherence_diag(one) == pytest.approx(1.0)
    grid = MeasurementSystem(1, 8, (np.arange(17) / 17 - 0.5)[:, None])
    assert coherence_diag(grid) <= 1e-10
    rand, _ = _system(0, 8, 12)
    assert 0 < coherence_diag(rand) < 1


def test_soft_threshold_complex():
    v = np.array([3 + 4j, 0.1, -2.0])
    out = soft_threshold(v, 1.0)
    np.testing.assert_allclose(out, [(3 + 4j) * 0.8, 0, -1.0])
