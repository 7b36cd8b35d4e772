from __future__ import annotations

import json
from pathlib import Path

import pytest

from mmas.cli import main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _write(tmp_path, obj):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(obj))
    return str(p)


def _files(d: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_bad_seed_and_missing_args_exit_2(tmp_path):
    assert main(["analyze", "--config", str(CONFIGS / "constant_analyze.json"), "--out", str(tmp_path), "--seed", "-1"]) == 2
    assert main(["analyze", "--out", str(tmp_path)]) == 2
    assert main(["frobnicate"]) == 2


def test_unknown_field_exit_2(tmp_path, capsys):
    cfg = _write(tmp_path, {"schema": "mmas.config/1", "system": {"knd": "vehicle"}})
    assert main(["analyze", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "system.knd" in capsys.readouterr().err


def test_missing_config_file_exit_2(tmp_path):
    assert main(["bounds", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 2


def test_analyze_constant_one_model(tmp_path):
    assert main(["analyze", "--config", str(CONFIGS / "constant_analyze.json"), "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "analyze_report.json").read_text())
    assert rep["selection"]["model_count"] == 1
    assert {v for row in rep["monotonicity"]["directions"] for k, v in row.items() if k != "entry"} == {"CONSTANT"}


def test_analyze_parabola_prints_witness(tmp_path):
    # a non-monotone synthetic family is a diagnostic outcome, not a failure
    assert main(["analyze", "--config", str(CONFIGS / "parabola_analyze.json"), "--out", str(tmp_path)]) == 0
    text = (tmp_path / "analyze_report.txt").read_text()
    assert "NON_MONOTONE a11 in m1: witness" in text
    assert json.loads((tmp_path / "analyze_report.json").read_text())["monotonicity"]["all_monotone"] is False


def test_analyze_vehicle_reports_grade_finding(tmp_path):
    cfg = _write(tmp_path, {"schema": "mmas.config/1", "analysis": {"coverage_samples": 200}})
    assert main(["analyze", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    text = (tmp_path / "o" / "analyze_report.txt").read_text()
    assert "theta_r" in text and "DECREASING" in text


def test_bounds_unit_box(tmp_path):
    assert main(["bounds", "--config", str(CONFIGS / "unit2x2_bounds.json"), "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "bounds_report.json").read_text())
    assert rep["det_bounds"] == [-1.0, 1.0]


def test_bounds_point_exact(tmp_path):
    assert main(["bounds", "--config", str(CONFIGS / "point_bounds.json"), "--out", str(tmp_path)]) == 0
    assert "exact" in (tmp_path / "bounds_report.txt").read_text()


def test_bounds_too_large_exit_2(tmp_path):
    z = [[0.0] * 9 for _ in range(9)]
    cfg = _write(tmp_path, {"schema": "mmas.config/1", "bounds": {"source": "explicit", "lb": z, "ub": z}})
    assert main(["bounds", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_simulate_outputs_and_header(tmp_path):
    args = ["simulate", "--config", str(CONFIGS / "sine_50kmh.json"), "--horizon", "0.2"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    lines = (tmp_path / "a" / "trace.csv").read_text().splitlines()
    N = len(json.loads((tmp_path / "a" / "simulate_report.json").read_text())["models"])
    assert lines[0] == "t,beta,r,phi,phidot,beta_hat,r_hat,phi_hat,phidot_hat," + ",".join(f"w_{i + 1}" for i in range(N)) + ",inclusion"
    assert len(lines) == 1 + 201
    for name in ("state_beta.svg", "state_r.svg", "state_phi.svg", "state_phidot.svg", "weights.svg", "inclusion.svg"):
        assert (tmp_path / "a" / name).read_text().startswith("<svg")


def test_simulate_byte_identical(tmp_path):
    args = ["simulate", "--config", str(CONFIGS / "sine_50kmh.json"), "--horizon", "0.2", "--seed", "5"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    assert _files(tmp_path / "a") == _files(tmp_path / "b")


def test_simulate_zero_input_all_zero(tmp_path):
    assert main(["simulate", "--config", str(CONFIGS / "zero_input.json"), "--out", str(tmp_path), "--horizon", "0.1"]) == 0
    rows = (tmp_path / "trace.csv").read_text().splitlines()[1:]
    for row in rows:
        vals = row.split(",")
        assert all(float(v) == 0.0 for v in vals[1:9])


def test_simulate_excursion_shows_outside(tmp_path):
    assert main(["simulate", "--config", str(CONFIGS / "excursion.json"), "--out", str(tmp_path), "--horizon", "1.0"]) == 0
    assert ",OUTSIDE" in (tmp_path / "trace.csv").read_text()


def test_simulate_synthetic_family_rejected(tmp_path):
    cfg = _write(tmp_path, {"schema": "mmas.config/1", "system": {"kind": "constant"}})
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_verify_corrupted_s_fails(tmp_path):
    cfg = _write(tmp_path, {"schema": "mmas.config/1", "verify": {"smoke": True, "suites": ["weight-transform"], "corrupt_s": True}})
    assert main(["verify", "--config", cfg, "--out", str(tmp_path / "o")]) == 1
    rep = json.loads((tmp_path / "o" / "verify_report.json").read_text())
    checks = rep["suites"][0]["checks"]
    assert any(c["name"] == "sum_i w_i S_i = I" and not c["ok"] for c in checks)


def test_verify_single_suite_passes(tmp_path):
    cfg = _write(tmp_path, {"schema": "mmas.config/1", "verify": {"smoke": True, "suites": ["canonical"]}})
    assert main(["verify", "--config", cfg, "--out", str(tmp_path / "o")]) == 0


def test_verify_unknown_suite_exit_2(tmp_path):
    cfg = _write(tmp_path, {"schema": "mmas.config/1", "verify": {"suites": ["astrology"]}})
    assert main(["verify", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
