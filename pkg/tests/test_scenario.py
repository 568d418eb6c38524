"""Scenario configs, CSV output, reports, and batch runs."""

import copy
import csv
import json
import math

import numpy as np
import pytest

from swsim import (
    CONSENSUS_THRESHOLD,
    ConfigError,
    default_scenario_path,
    parse_config,
    run_batch,
    run_scenario,
    serialize,
    write_trajectory_csv,
)
from conftest import base_config_doc

T = math.pi


def test_bundled_scenario_parses():
    cfg = parse_config(default_scenario_path())
    assert cfg.n == 4
    assert cfg.tf == 150.0
    assert cfg.step_value() == 1e-3
    assert sorted(cfg.graphs) == [1, 2, 3]
    fam = cfg.family()
    assert fam.n == 4


def test_serialize_round_trip():
    doc = base_config_doc()
    cfg = parse_config(doc)
    doc2 = serialize(cfg)
    cfg2 = parse_config(doc2)
    assert cfg == cfg2
    assert serialize(cfg2) == doc2


def test_parse_accepts_json_text_and_rejects_missing_file(tmp_path):
    doc = base_config_doc()
    cfg = parse_config(json.dumps(doc))
    assert cfg.n == 4
    with pytest.raises(ConfigError, match="not found"):
        parse_config(str(tmp_path / "nope.json"))
    path = tmp_path / "ok.json"
    path.write_text(json.dumps(doc))
    assert parse_config(path).n == 4


@pytest.mark.parametrize(
    "mutate, match",
    [
        (lambda d: d.update(bogus=1), "bogus"),
        (lambda d: d.pop("controller"), "controller"),
        (lambda d: d["excitation"].update(T0=2.0 * T), "T0"),
        (lambda d: d["controller"].update(kv=0.0), "kv"),
        (lambda d: d["controller"].update(kw=-1.0), "kw"),
        (lambda d: d["graphs"]["1"].append({"i": 1, "j": 1, "w": 1.0}), "self"),
        (lambda d: d["graphs"]["1"].append({"i": 1, "j": 9, "w": 1.0}), "range"),
        (lambda d: d["graphs"]["1"].append({"i": 2, "j": 1, "w": 2.0}), "duplicate"),
        (lambda d: d["graphs"]["1"].__setitem__(0, {"i": 1, "j": 2, "w": -1.0}), "weight"),
        (lambda d: d["schedule"].update(kind="warp"), "schedule"),
        (lambda d: d["excitation"]["c"].update(kind="noise"), "c"),
        (lambda d: d["init"].update(kind="shrug"), "init"),
        (lambda d: d["init"].update(seed=-3), "seed"),
        (lambda d: d["integrator"].update(tf=0.0), "tf"),
        (lambda d: d["integrator"].update(step=True), "step"),
        (lambda d: d.update(n=1.5), "n"),
        (lambda d: d["graphs"].pop("3"), "mode 3"),
    ],
)
def test_parse_rejections(mutate, match):
    doc = base_config_doc()
    mutate(doc)
    with pytest.raises(ConfigError, match=match):
        parse_config(doc)


def test_parse_rejects_phase_violation_with_guidance():
    doc = base_config_doc()
    doc["excitation"]["c"]["value"] = 2.0  # integral lands exactly on pi
    with pytest.raises(ConfigError, match="phase condition"):
        parse_config(doc)
    cfg = parse_config(doc, enforce_phase=False)
    assert cfg.profile().c_at(0.0) == 2.0


def test_explicit_schedule_config():
    doc = base_config_doc()
    doc["schedule"] = {
        "kind": "explicit",
        "events": [{"t": 0.0, "mode": 1}, {"t": 1.0, "mode": 2}, {"t": 2.0, "mode": 3}],
    }
    cfg = parse_config(doc)
    sched = cfg.schedule_obj()
    assert sched.mode_at(1.5) == 2
    bad = copy.deepcopy(doc)
    bad["schedule"]["events"][1]["t"] = 0.0
    with pytest.raises(ConfigError, match="increasing"):
        parse_config(bad)
    stray = copy.deepcopy(doc)
    stray["schedule"]["t_prime"] = 1.0
    with pytest.raises(ConfigError):
        parse_config(stray)


def test_explicit_init_states():
    doc = base_config_doc()
    doc["init"] = {
        "kind": "explicit",
        "states": [{"x": float(i), "y": 0.0, "theta": 0.1 * i} for i in range(4)],
    }
    cfg = parse_config(doc)
    st = cfg.initial_state()
    assert np.allclose(st.x, [0.0, 1.0, 2.0, 3.0], atol=1e-15)
    short = copy.deepcopy(doc)
    short["init"]["states"] = short["init"]["states"][:2]
    with pytest.raises(ConfigError, match="exactly 4"):
        parse_config(short)


def test_random_init_is_seeded_and_bounded():
    doc = base_config_doc()
    doc["init"] = {"kind": "random", "bound": 2.5, "seed": 42}
    cfg = parse_config(doc)
    a = cfg.initial_state()
    b = cfg.initial_state()
    assert np.array_equal(a.x, b.x) and np.array_equal(a.theta, b.theta)
    allv = np.concatenate([a.x, a.y, a.theta])
    assert np.abs(allv).max() <= 2.5


def _short_run(tmp_path, tf=2.0, seed=0):
    doc = base_config_doc()
    doc["integrator"]["tf"] = tf
    doc["init"]["seed"] = seed
    doc["output"] = str(tmp_path / "run.csv")
    cfg = parse_config(doc)
    return run_scenario(cfg)


def test_csv_format_and_determinism(tmp_path):
    report1, traj = _short_run(tmp_path / "a")
    report2, _ = _short_run(tmp_path / "b")
    b1 = open(report1.csv_path, "rb").read()
    b2 = open(report2.csv_path, "rb").read()
    assert b1 == b2
    assert b"\r" not in b1  # LF endings only

    with open(report1.csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    assert header[:2] == ["t", "mode"]
    assert header[2:5] == ["x1", "y1", "theta1"]
    assert header[-6:] == ["dist_omega", "W", "U", "V", "h1", "h_norm_sq"]
    assert len(header) == 2 + 3 * 4 + 6
    assert len(rows) - 1 == traj.n_samples


def test_csv_floats_round_trip_exactly(tmp_path):
    report, traj = _short_run(tmp_path)
    data = np.genfromtxt(report.csv_path, delimiter=",", names=True)
    assert np.array_equal(data["t"], traj.times)
    assert np.array_equal(data["x3"], traj.x[:, 2])
    assert np.array_equal(data["theta1"], traj.theta[:, 0])
    assert np.array_equal(data["mode"].astype(int), traj.modes)


def test_report_threshold_time_matches_csv(tmp_path):
    doc = base_config_doc()
    doc["integrator"]["tf"] = 40.0
    doc["integrator"]["step"] = 0.002
    doc["output"] = str(tmp_path / "long.csv")
    report, _ = run_scenario(parse_config(doc))
    data = np.genfromtxt(report.csv_path, delimiter=",", names=True)
    below = np.nonzero(data["dist_omega"] < CONSENSUS_THRESHOLD)[0]
    if report.time_to_threshold is None:
        assert below.size == 0
    else:
        assert data["t"][below[0]] == pytest.approx(report.time_to_threshold, abs=1e-12)
    rep_doc = json.load(open(report.report_path))
    assert rep_doc["threshold"] == CONSENSUS_THRESHOLD
    assert rep_doc["final_distance"] == pytest.approx(report.final_distance)


def test_consensus_init_stays_at_consensus(tmp_path):
    doc = base_config_doc()
    doc["init"] = {
        "kind": "explicit",
        "states": [{"x": 1.0, "y": -2.0, "theta": 0.4}] * 4,
    }
    doc["integrator"]["tf"] = 1.0 * T
    cfg = parse_config(doc)
    report, traj = run_scenario(cfg, write_files=False)
    from swsim import trajectory_channels

    dist = trajectory_channels(traj)["dist"]
    assert dist.max() < 1e-9
    assert report.time_to_threshold == 0.0


def test_run_scenario_report_fields(tmp_path):
    report, traj = _short_run(tmp_path)
    assert report.sample_count == traj.n_samples
    assert report.switch_count == traj.switch_count
    assert report.connectivity_margin == pytest.approx(
        (T / 6) * (2.0 - math.sqrt(2.0)), abs=1e-12
    )
    assert report.gujc["holds_on_horizon"] is True
    assert report.wall_clock_s > 0.0
    d = report.to_dict()
    json.dumps(d, sort_keys=True)  # serializable as-is


def test_run_batch_serial_and_parallel_agree(tmp_path, monkeypatch):
    doc = base_config_doc()
    doc["integrator"]["tf"] = 1.5
    cfg = parse_config(doc)
    serial = run_batch(cfg, [0, 1], tmp_path / "serial", max_workers=1)
    monkeypatch.setenv("SWSIM_THREADS", "2")
    parallel = run_batch(cfg, [0, 1], tmp_path / "parallel")
    assert sorted(serial) == sorted(parallel) == [0, 1]
    for seed in (0, 1):
        assert serial[seed].final_distance == pytest.approx(
            parallel[seed].final_distance, abs=0.0
        )
        a = open(tmp_path / "serial" / f"seed{seed}.csv", "rb").read()
        b = open(tmp_path / "parallel" / f"seed{seed}.csv", "rb").read()
        assert a == b
    assert serial[0].final_distance != serial[1].final_distance


def test_run_batch_requires_random_init(tmp_path):
    doc = base_config_doc()
    doc["init"] = {
        "kind": "explicit",
        "states": [{"x": 0.0, "y": 0.0, "theta": 0.0}] * 4,
    }
    with pytest.raises(ValueError, match="random"):
        run_batch(parse_config(doc), [0], tmp_path)
