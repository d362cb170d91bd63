import json
import math
import os
import subprocess

import numpy as np
import pytest

import glassmem as gm


def test_confocal_matrix_is_symmetric_with_beta_diagonal():
    j = gm.confocal_matrix(12, 1.0, seed=3)
    assert j.shape == (12, 12)
    assert np.allclose(j, j.T)
    assert np.all(np.diag(j) > 8.0)


def test_relax_reaches_fixed_point_and_lowers_energy():
    j = gm.sk_matrix(30, 1.0 / 30, seed=5)
    s0 = np.where(np.random.default_rng(1).random(30) < 0.5, -1.0, 1.0)
    out = gm.relax(s0, j, "sd")
    assert out["converged"]
    s = out["final"]
    assert gm.energy(s, j) <= gm.energy(s0, j)
    assert all(gm.flip_cost(s, j, i) >= 0 for i in range(30))


def test_coupling_law_normalisation_and_moments():
    grid = np.linspace(-0.999999, 0.999999, 200001)
    area = np.trapezoid([gm.coupling_pdf(x, 1.0) for x in grid], grid)
    assert area == pytest.approx(1.0, abs=2e-3)
    mean, std = gm.coupling_moments(1.0)
    assert mean == pytest.approx(0.2)
    assert gm.coupling_pdf(0.0, 1.0) == pytest.approx(0.2878, abs=1e-4)


def test_effective_temperature_and_half_time():
    p = gm.CavityParams()
    assert gm.effective_temperature(p) == pytest.approx(2 * math.pi * 0.751875)
    assert gm.decoherence_half_time(20.0, 2 * math.pi * 0.004, 1) == pytest.approx(19.6, abs=0.05)


def test_meanfield_stays_in_bounds():
    j = 0.01 * gm.sk_matrix(6, 1.0, seed=2)
    times, m = gm.meanfield(np.array([1, -1, 1, -1, 1, -1.0]), 50.0, j, 200.0)
    assert len(times) == m.shape[0]
    assert np.all(np.abs(m) <= 1.0)


def test_pseudoinverse_patterns_are_fixed_points():
    rng = np.random.default_rng(4)
    xi = np.where(rng.random((5, 40)) < 0.5, -1.0, 1.0)
    j = gm.pseudoinverse_matrix(xi)
    probs, basin = gm.recall_curve(xi[0], j, "sd", max_d=3, trials=20, seed=1)
    assert probs[0] == 1.0


def test_config_roundtrip_and_validation():
    text = gm.default_config("rates-table")
    assert json.loads(text)["experiment"] == "rates-table"
    assert gm.validate_config(text) == []
    bad = json.dumps({"experiment": "rates-table", "cavity": {"delta_c_mhz": 3.0}})
    assert "blue detuning unsupported" in gm.validate_config(bad)
    with pytest.raises(gm.ConfigError):
        gm.validate_config(json.dumps({"experiment": "rates-table", "typo": 1}))


def test_run_rates_table(tmp_path):
    cfg = json.dumps({"experiment": "rates-table", "output": str(tmp_path)})
    manifest = json.loads(gm.run(cfg))
    names = {o["file"] for o in manifest["outputs"]}
    assert "rates.csv" in names
    assert (tmp_path / "manifest.json").exists()


@pytest.mark.skipif("GLASSMEM_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_exit_codes(tmp_path):
    cli = os.environ["GLASSMEM_CLI"]
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    r = subprocess.run([cli, "rates-table", "--config", str(cfg)], capture_output=True)
    assert r.returncode == 2
    cfg.write_text("{}")
    r = subprocess.run([cli, "rates-table", "--config", str(cfg), "--out", str(tmp_path / "o")], capture_output=True)
    assert r.returncode == 0
    assert (tmp_path / "o" / "rates.csv").exists()
