"""Acceptance criteria, each at its stated size and tolerance.

Every test records one PASS/FAIL line; the lines are printed together in the
terminal summary.  Criteria 3 and 5 are known to fail (see README).
"""
from __future__ import annotations

import subprocess
import sys
import time
from pathlib import Path

import pytest

from mmas.cli import main
from mmas.experiments import containment_suite, point_exactness, rk4_orders, run_inclusion_study, transform_trials, weight_recovery

ROOT = Path(__file__).resolve().parents[1]
SEED = 7
RESULTS: dict[int, str] = {}

pytestmark = pytest.mark.slow


def _record(num: int, title: str, ok: bool, detail: str) -> None:
    RESULTS[num] = f"criterion {num} {'PASS' if ok else 'FAIL'}  {title}: {detail}"


def test_criterion_1_charpoly_bound_soundness():
    t0 = time.perf_counter()
    rows = containment_suite(SEED, families=10, samples=10_000, rtol=1e-12)
    elapsed = time.perf_counter() - t0
    violations = sum(r["total_violations"] for r in rows)
    ns = {r["n"] for r in rows[1:]}
    ok = violations == 0 and elapsed <= 60 and len(rows) == 11 and ns == {2, 3, 4}
    _record(1, "charpoly bound soundness", ok, f"{violations} violations over {len(rows)} families x 10000, {elapsed:.1f} s")
    assert ok


def test_criterion_2_point_interval_exactness():
    r = point_exactness(SEED, count=1000)
    ok = r["worst_relative"] <= 1e-10
    _record(2, "point-interval exactness", ok, f"worst relative gap {r['worst_relative']:.2e} over 1000 matrices (limit 1e-10)")
    assert ok


def test_criterion_3_weight_transform_oracle_equivalence():
    t0 = time.perf_counter()
    r = transform_trials(SEED, count=1000)
    elapsed = time.perf_counter() - t0
    ok_oracle = r["oracle_residual_max"] <= 1e-8
    ok_sum = r["sum_identity_max"] <= 1e-9
    ok = ok_oracle and ok_sum and elapsed <= 30
    _record(3, "weight-transform oracle equivalence", ok,
            f"reconstruction vs direct {r['oracle_residual_max']:.3g} (limit 1e-8), "
            f"sum w_i S_i - I {r['sum_identity_max']:.2e} (limit 1e-9), {elapsed:.1f} s")
    assert ok


def test_criterion_4_inclusion_forward_backward(vehicle_set):
    r = run_inclusion_study(vehicle_set, n_in=100, n_out=100, seed=SEED)
    fwd_ok = r["forward_pass"] == r["forward_total"] == 100
    bwd_ok = r["backward_rate"] >= 0.95
    missed = [o for o in r["backward"] if not o["passed"]]
    explained = all(o["detail"].get("yaw_separation") is not None for o in missed)
    ok = fwd_ok and bwd_ok and explained
    _record(4, "inclusion forward/backward", ok,
            f"in-hull {r['forward_pass']}/{r['forward_total']}, excursions fired {r['backward_fired']}/{r['backward_total']}"
            + (f", missed yaw separations {[round(o['detail']['yaw_separation'], 4) for o in missed]}" if missed else ""))
    assert ok


def test_criterion_5_weight_recovery():
    r = weight_recovery(w_star=(0.3, 0.7), settle=1.0)
    ok_w = r["weight_error_after_settle"] <= 1e-3
    ok_x = r["full_state_relative_rmse"] <= 1e-6
    _record(5, "weight recovery", ok_w and ok_x,
            f"|w - w*| after 1 s {r['weight_error_after_settle']:.4g} (limit 1e-3), "
            f"full-state relative RMSE {r['full_state_relative_rmse']:.3g} (limit 1e-6)")
    assert ok_w and ok_x


def test_criterion_6_model_count(tmp_path):
    import json

    code = main(["analyze", "--config", str(ROOT / "configs" / "vehicle_analyze.json"), "--out", str(tmp_path), "--seed", str(SEED)])
    rep = json.loads((tmp_path / "analyze_report.json").read_text())
    claim = rep["model_count_claim"]
    text = (tmp_path / "analyze_report.txt").read_text()
    ok = (
        code == 0
        and claim["all_monotone"]
        and claim["model_count"] <= 4
        and claim["coverage"]["samples"] == 10_000
        and "hull coverage" in text
        and claim["published_target"] == 2
        and (claim["matches_published"] or "DISCREPANCY" in text)
    )
    _record(6, "model-count claim", ok,
            f"{claim['model_count']} models {[c['bits'] for c in rep['selection']['corners']]}, published 2, "
            f"hull coverage {claim['coverage']['fraction']:.4f}, discrepancy reported")
    assert ok


def test_criterion_7_rk4_order():
    rows = rk4_orders(speeds_kmh=(50.0, 100.0))
    ratios = [r["ratio"] for r in rows]
    ok = all(8 <= q <= 32 for q in ratios)
    _record(7, "RK4 order", ok, "ratios " + ", ".join(f"{r['speed_kmh']:.0f} km/h {r['ratio']:.2f}" for r in rows) + " (range [8, 32])")
    assert ok


def test_criterion_8_verify_determinism(tmp_path):
    cfg = str(ROOT / "configs" / "verify.json")
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        subprocess.run([sys.executable, "-m", "mmas.cli", "verify", "--config", cfg, "--out", str(out), "--seed", str(SEED)],
                       check=False, capture_output=True)
        outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    ok = bool(outs[0]) and "verify_report.json" in outs[0] and outs[0] == outs[1]
    _record(8, "verify determinism", ok, f"{len(outs[0])} files compared byte-for-byte, {'identical' if ok else 'different'}")
    assert ok
