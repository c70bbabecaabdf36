import math
import subprocess
import sys

import numpy as np
import pytest

from barron_sampling.barron_core import FourierSum, random_unit_sum, to_text
from barron_sampling.cli import main
from barron_sampling.global_recon import make_global_plan, reconstruct_global
from barron_sampling.harness import (ExperimentConfig, RateReport, fit_slope, load_config,
                                     parse_config, pipeline_points, reconstruct_scaled, run_fool,
                                     run_rates, trial_rng)
from barron_sampling.quadrature import cross_checked_norm, lp_norm_estimate

SMALL = dict(d=1, sigma=1.0, p=2.0, epsilons=(0.3, 0.2, 0.12, 0.08), trials=2, seed=5)


def test_lp_norm_examples():
    assert lp_norm_estimate(lambda x: np.full(len(x), 3.0), 1.5) == pytest.approx(3.0)
    cos = lambda x: math.sqrt(2) * np.cos(2 * np.pi * x[:, 0])
    assert lp_norm_estimate(cos, 2) == pytest.approx(1.0, abs=1e-10)
    assert lp_norm_estimate(cos, math.inf) == pytest.approx(math.sqrt(2), abs=1e-6)
    q, mc, ok = cross_checked_norm(cos, 4)
    assert ok and abs(q - mc) <= 0.02 * q
    with pytest.raises(ValueError):
        lp_norm_estimate(cos, 2, resolution=1)


def test_config_parsing(tmp_path):
    text = "d = 2  # dimension\nsigma = 1.5\nepsilons = 0.1, 0.05\n\nfeas-tol = 1e-9\n"
    vals = parse_config(text)
    assert vals == {"d": 2, "sigma": 1.5, "epsilons": ("0.1", "0.05"), "feas_tol": 1e-9}
    path = tmp_path / "run.cfg"
    path.write_text(text)
    cfg = load_config(path, sigma=2.0, seed=None)
    assert cfg.sigma == 2.0 and cfg.epsilons == (0.1, 0.05) and cfg.solver.feas_tol == 1e-9
    with pytest.raises(ValueError):
        parse_config("bogus = 1")
    with pytest.raises(ValueError):
        parse_config("d 3")
    with pytest.raises(ValueError):
        ExperimentConfig(p=0.5)
    assert load_config(None, p=math.inf).p == math.inf


def test_fit_slope():
    ms = [10, 100, 1000, 10_000]
    slope, ci, n = fit_slope(ms, [m ** -1.5 for m in ms], skip_smallest=False)
    assert slope == pytest.approx(-1.5) and n == 4 and ci[0] <= slope <= ci[1]
    assert math.isnan(fit_slope(ms[:3], [1, 2, 3])[0])


def test_trial_streams_independent_of_order():
    a = trial_rng(3, 1, 2).random(4)
    trial_rng(3, 0, 0).random(10)
    np.testing.assert_array_equal(a, trial_rng(3, 1, 2).random(4))
    assert not np.array_equal(a, trial_rng(3, 2, 1).random(4))


def test_rates_deterministic_csv(tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    r1 = run_rates(ExperimentConfig(**SMALL, output=str(out1)))
    run_rates(ExperimentConfig(**SMALL, workers=2, output=str(out2)))
    assert out1.read_bytes() == out2.read_bytes()
    lines = out1.read_text().splitlines()
    assert lines[0] == RateReport.header and len(lines) == 5
    # reported m is the exact number of evaluations of the plan
    for row, eps in zip(r1.rows, SMALL["epsilons"]):
        plan = make_global_plan(eps, 1.0, 1, kappa0=0.02)
        assert row.m == plan.total_samples
    assert r1.dominance >= 0.9


def test_sup_and_clip_rates_run():
    rep = run_rates(ExperimentConfig(d=1, sigma=1.0, p=math.inf, ms=(32, 64, 128, 256), trials=2))
    assert rep.slope < -0.8 and rep.dominance == 1.0
    rep = run_rates(ExperimentConfig(d=1, sigma=1.0, p=4.0, ms=(400, 800), trials=1))
    assert all(r.mean_err <= r.bound for r in rep.rows)


def test_fool_report(tmp_path):
    cfg = ExperimentConfig(d=1, sigma=1.0, p=2.0, epsilons=(0.3, 0.15, 0.08), output=str(tmp_path / "f.csv"))
    rep = run_fool(cfg)
    assert (tmp_path / "f.csv").read_text().splitlines()[0] == "M,N,lambda_hit,barron_bound,lp_norm"
    for r in rep.rows:
        assert r.lp_norm > 0 and r.barron_bound <= 1 + 1e-12
        assert max(r.err_plus, r.err_minus) >= r.lp_norm - 1e-9


def test_reconstruct_scaled_examples(rng):
    f = random_unit_sum(rng, 1, 1.0)
    plan = make_global_plan(0.2, 1.0, 1, kappa0=0.02, seed=4)
    inner = lambda y: reconstruct_global(y, plan)
    y = np.real(f(plan.points))
    x = np.linspace(-0.49, 0.49, 257)
    same = reconstruct_scaled(y, 1.0, inner)
    np.testing.assert_array_equal(same(x), inner(y)(x))
    big = reconstruct_scaled(10 * y, 10.0, inner)
    np.testing.assert_allclose(big(x) - 10 * f(x).real, 10 * (same(x) - f(x).real),
                               rtol=1e-12, atol=1e-12)
    zero = reconstruct_scaled(np.zeros_like(y), 2.0, inner)
    assert np.all(zero(x) == 0)
    with pytest.raises(ValueError):
        reconstruct_scaled(y, 0.0, inner)


def test_cli_reconstruct_roundtrip(tmp_path, capsys):
    f = FourierSum.from_atoms(1, [(1, 0.25), (-1, 0.25)])
    (tmp_path / "f.txt").write_text(to_text(f, 1.0))
    pts_file = tmp_path / "pts.csv"
    assert main(["reconstruct", "--epsilons", "0.03", "--points-out", str(pts_file)]) == 0
    pts = np.loadtxt(pts_file, delimiter=",", ndmin=2)
    expected, _ = pipeline_points(ExperimentConfig(epsilons=(0.03,)), 0.03)
    np.testing.assert_array_equal(pts, expected.reshape(pts.shape))
    np.savetxt(tmp_path / "y.csv", np.real(f(pts)), delimiter=",", fmt="%.17g")
    (tmp_path / "x.csv").write_text("0.0\n0.1\n")
    args = ["reconstruct", "--epsilons", "0.03", "--eval", str(tmp_path / "x.csv")]
    capsys.readouterr()
    assert main(args + ["--samples", str(tmp_path / "y.csv"), "--save", str(tmp_path / "est")]) == 0
    from_samples = capsys.readouterr().out
    assert main(args + ["--function", str(tmp_path / "f.txt")]) == 0
    assert capsys.readouterr().out == from_samples
    vals = np.array(from_samples.split(), dtype=float)
    assert np.max(np.abs(vals - f(np.array([0.0, 0.1])).real)) < 0.1
    assert (tmp_path / "est" / "manifest.json").exists()


def test_cli_check_exit_codes(capsys):
    assert main(["check", "--only", "clip"]) == 0
    assert capsys.readouterr().out.startswith("PASS clip")


def test_cli_entry_point_help():
    out = subprocess.run([sys.executable, "-m", "barron_sampling.cli", "--help"],
                         capture_output=True, text=True, check=True).stdout
    for sub in ("rates", "fool", "solver-bench", "check", "reconstruct"):
        assert sub in out


def test_cli_rates_stdout(capsys):
    assert main(["rates", "--epsilons", "0.3,0.2", "--trials", "1"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == RateReport.header


def test_cli_bench(tmp_path):
    out = tmp_path / "bench.csv"
    assert main(["solver-bench", "--bench-trials", "3", "-o", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "s,trials,successes,mean_iters,mean_ms" and len(lines) == 4
