import math
import os
from pathlib import Path

import numpy as np
import pytest

import drivestyle as ds

SCENARIO = Path(os.environ.get("DRIVESTYLE_SCENARIO",
                               Path(__file__).resolve().parents[2] / "scenarios" / "paper.scenario"))


@pytest.fixture(scope="module")
def scenario():
    return ds.Scenario.from_file(str(SCENARIO))


@pytest.fixture(scope="module")
def demo(scenario):
    return ds.run_demo(scenario)


def test_step_matches_hand_computation():
    x = ds.step([0.0, 0.0, 0.0, 20.0], [1.0, 0.0], 0.2)
    assert x == pytest.approx([4.0, 0.0, 0.0, 20.2], abs=1e-12)


def test_normal_quantile():
    assert ds.normal_quantile(0.5) == pytest.approx(0.0, abs=1e-12)
    assert ds.normal_quantile(0.975) == pytest.approx(1.959963984540054, rel=1e-9)
    with pytest.raises(ValueError):
        ds.normal_quantile(1.0)


def test_demo_shape_and_lane_change(scenario, demo):
    ev = demo["ev"]
    assert ev.shape == (scenario.sample_count, 9)
    assert len(demo["statuses"]) == scenario.sample_count - 1
    assert abs(ev[-1, 2] - scenario.target_lane) < 0.5
    assert list(ds.TRAJECTORY_COLUMNS) == ["t", "x", "y", "phi", "v", "vx", "vy", "ax", "ay"]


def test_features_and_trigger(scenario, demo):
    f = ds.features(demo["ev"], scenario, tv=demo["tv"])
    assert set(ds.FEATURE_NAMES) <= set(f)
    assert f["triggered"]
    assert 2.6 <= f["t_trg"] <= 3.4
    assert all(math.isfinite(f[n]) and f[n] >= 0.0 for n in ds.FEATURE_NAMES)


def test_zero_weights_reproduce_the_initial_trajectory(scenario, demo):
    r = ds.reproduce({n: 0.0 for n in ds.FEATURE_NAMES}, demo["ev"], scenario, tv=demo["tv"])
    np.testing.assert_array_equal(r["trajectory"][:, [0, 1, 2, 5, 6, 7, 8]],
                                  demo["ev"][:, [0, 1, 2, 5, 6, 7, 8]])
    assert r["cost"] == 0.0


def test_learn_and_compare(scenario, demo):
    res = ds.learn(demo["ev"], scenario, tv=demo["tv"], features=6)
    assert set(res["theta"]) == set(ds.FEATURE_NAMES)
    assert all(v >= 0.0 for v in res["theta"].values())
    assert 1 <= res["best_iteration"] <= len(res["epsilon"])
    c = ds.compare(res["reproduced"], demo["ev"], 150.0, 220.0)
    assert c["samples"] > 0 and math.isfinite(c["max_gap"])
    same = ds.compare(demo["ev"], demo["ev"])
    assert same["max_gap"] == 0.0


def test_round_trip_file(tmp_path, demo):
    path = tmp_path / "ev.csv"
    ds.write_trajectory(str(path), demo["ev"])
    np.testing.assert_array_equal(ds.read_trajectory(str(path)), demo["ev"])


def test_errors(tmp_path, scenario):
    with pytest.raises(ds.IoError):
        ds.read_trajectory(str(tmp_path / "missing.csv"))
    bad = tmp_path / "bad.csv"
    bad.write_text("t,x\n0,1\n")
    with pytest.raises(ds.FormatError, match="missing column"):
        ds.read_trajectory(str(bad))
    with pytest.raises(ds.ScenarioError, match="smpc.risk"):
        scenario.risk = 1.5
    with pytest.raises(ValueError):
        ds.features(np.zeros((3, 4)), scenario)
