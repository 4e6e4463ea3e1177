import json
import math
import os
import subprocess

import numpy as np
import pytest

import tcsampler as tcs


def test_version_and_names():
    assert tcs.__version__ == "1.0.0"
    assert "mixture13" in tcs.experiment_names()


def test_targets_and_speeds():
    g = tcs.gaussian([0.0], [1.0])
    assert g.dim == 1
    assert g.potential([2.0]) == pytest.approx(2.0)
    s = tcs.exp_alpha_speed(g, 0.5)
    assert s([2.0]) == pytest.approx(math.exp(1.0))
    assert tcs.one_plus_norm_sq_speed(1.0)([1.0, 1.0]) == pytest.approx(3.0)
    assert len(tcs.mixture13_means()) == 13


def test_timechanged_zigzag():
    g = tcs.gaussian([0.0], [1.0])
    s = tcs.one_plus_norm_sq_speed(1.0)
    tc = tcs.zigzag(g, s, x0=[0.0], horizon=200.0, seed=3)
    path = tc.path
    assert path.dynamics == "speed_scaled"
    assert path.horizon == pytest.approx(200.0)
    times = path.times
    assert np.all(np.diff(times) > 0)
    assert path.positions.shape == (len(path), 1)
    # r and r^{-1} are inverse to each other.
    for t in (1.0, 50.0, 199.0):
        assert tc.changed_time(tc.base_time(t)) == pytest.approx(t, abs=1e-9)
    assert tc.stats["envelope_violations"] == 0
    # The two estimator routes agree on the same path.
    f = lambda x: math.cos(x[0])
    direct = tcs.direct_average(path, f)
    reweighted = tcs.reweighted_average(tc.base, f, s, tc.base_time(path.horizon))
    assert direct["estimate"] == pytest.approx(reweighted["estimate"], abs=1e-6)
    assert direct["estimate"] == pytest.approx(math.exp(-0.5), abs=6 * direct["standard_error"] + 0.02)


def test_normalizing_constant():
    g = tcs.gaussian([0.0], [1.0])
    s = tcs.exp_alpha_speed(g, 0.5)
    tc = tcs.zigzag(g, s, x0=[0.0], horizon=5e3, seed=5)
    assert tc.mu_s() == pytest.approx(math.sqrt(2.0), rel=0.1)
    z = tc.normalizing_constant(2.0 * math.sqrt(math.pi))
    assert z == pytest.approx(math.sqrt(2.0 * math.pi), rel=0.1)


def test_algorithm1_and_discretized_average():
    g = tcs.gaussian([0.0, 0.0], [1.0, 1.0])
    s = tcs.one_plus_norm_sq_speed(1.0)
    path = tcs.algorithm1(g, s, [0.0, 0.0], n_jumps=5000, kernel="zz_lifted", delta=0.2, seed=2)
    assert path.dynamics == "piecewise_constant_state"
    r = tcs.discretized_average(path, lambda x: x @ x, delta=0.05)
    assert r["estimate"] == pytest.approx(2.0, rel=0.3)
    with pytest.raises(tcs.SamplerError):
        tcs.algorithm1(g, s, [0.0, 0.0])


def test_discrete_exact_law():
    w = [1.0, 2.0, 3.0, 4.0]
    nb = [[1, 3], [0, 2], [1, 3], [2, 0]]
    speed = [1.0, 5.0, 2.0, 3.0]
    pi = tcs.exact_stationary(w, nb, speed, "barker")
    assert np.allclose(pi, np.array(w) / sum(w), atol=1e-12)
    occ = tcs.discrete_occupation(w, nb, speed, "barker", horizon=2e4, seed=4)
    assert np.allclose(occ, pi, atol=0.03)


def test_crossing_probability_closed_form():
    dw = tcs.double_well_1d()
    assert tcs.crossing_probability(dw, tcs.constant_speed(), -1.0, 0.0) == pytest.approx(math.exp(-1.0))
    s = tcs.exp_alpha_speed(dw, 0.9)
    assert tcs.crossing_probability(dw, s, -1.0, 0.0) == pytest.approx(math.exp(-0.1))


def test_ball_map():
    y = np.array([0.3, -0.4])
    x = tcs.ball_map(y)
    assert np.allclose(tcs.ball_map_inverse(x), y)
    assert tcs.ball_map_jacobian_det(y) == pytest.approx((1 - 0.25) ** -2)
    samples = tcs.ball_samples(2, 200, seed=1)
    assert samples.shape == (200, 2)
    assert np.all(np.linalg.norm(samples, axis=1) < 1)


def test_configs_and_experiments(tmp_path):
    cfg = tcs.default_config("discrete_oracle")
    assert cfg["experiment"] == "discrete_oracle"
    with pytest.raises(tcs.ConfigError):
        tcs.resolve_config({"experiment": "heavytail", "params": {"a": 0.5}})
    run = tcs.run_experiment({"experiment": "discrete_oracle", "horizon": 500.0}, out_dir=str(tmp_path))
    assert run["summary"]["max_abs_dev"] < 1e-10
    assert "oracle.csv" in run["files"]
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["status"] == "ok"
    again = tcs.run_experiment(run["config"])
    assert again["files"] == run["files"]


@pytest.mark.skipif(not os.environ.get("TCS_CLI"), reason="CLI path not provided")
def test_cli_round_trip(tmp_path):
    cli = os.environ["TCS_CLI"]
    out = tmp_path / "s"
    res = subprocess.run([cli, "sample", "--horizon", "50", "--out", str(out)], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    summary = json.loads(res.stdout)
    assert summary["out"] == str(out)
    assert (out / "skeleton.csv").exists()
    bad = subprocess.run([cli, "experiment", "eyring", "--a", "1.5"], capture_output=True, text=True)
    assert bad.returncode == 2
