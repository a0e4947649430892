import json
import os
import subprocess

import pytest

import occupancy_mlp as om


def test_structure_and_grid():
    assert om.NetworkStructure([18, 13]).parameter_count() == 459
    assert len(om.default_grid()) == 129
    assert om.default_candidate().label() == "rh_co2:18,13"
    assert om.WindowSpec().counts == [10, 18, 5, 18, 10]


def test_metrics():
    assert om.mse([1, 2], [2, 4]) == 2.5
    assert om.mae([1, 2], [2, 4]) == 1.5
    r2, p = om.r_squared_with_p([5, 7, 9, 11, 14], [1, 2, 3, 4, 5.5])
    assert abs(r2 - 1) < 1e-12
    assert om.evaluate([1, 1, 1], [1, 2, 3]).r2 is None


def test_xor():
    cfg = om.RpropConfig()
    cfg.threshold = 0.01
    net = om.init_network(om.NetworkStructure([2], input_dim=2), 1)
    _, report = om.train_batch(net, [[0, 0], [0, 1], [1, 0], [1, 1]], [0, 1, 1, 0], cfg)
    assert report.converged


def test_simulate_and_reconstruct_via_files(tmp_path):
    scenario = om.RoomScenario()
    scenario.seed = 4
    series, schedule = om.simulate_school(scenario, days=3)
    assert len(series) == 3 * 1440
    labeled = om.label_samples(series, schedule)
    fs = om.build_feature_set(labeled, series, om.VariableCombo.RH_CO2, True)
    assert len(fs) > 0
    assert all(v.target is not None for v in fs.vectors)


def test_cli_roundtrip(tmp_path):
    code, out, err = om.run_cli(["synth", "--days", "2", "--seed", "3", "--out-dir", str(tmp_path)])
    assert code == 0, err
    assert (tmp_path / "run.toml").exists()
    code, out, err = om.run_cli(["ingest", "--config", str(tmp_path / "run.toml")])
    assert code == 0, err
    summary = json.loads((tmp_path / "ingest_summary.json").read_text())
    assert summary
    code, _, _ = om.run_cli(["nope"])
    assert code == 1


@pytest.mark.skipif(not os.environ.get("OCCUPANCY_CLI"), reason="CLI binary not provided")
def test_cli_binary_help():
    res = subprocess.run([os.environ["OCCUPANCY_CLI"], "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "synth" in res.stdout
