"""``mmas`` command line: analyze | bounds | simulate | verify.

Exit codes: 0 success, 1 suite or criterion failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from mmas import __version__
from mmas.canonical import DEFAULT_RANK_TOL, Uncontrollable, char_coeffs, controllability_ratio
from mmas.charpoly_bounds import DimensionTooLarge, all_coeff_bounds, det_bounds, sampled_containment
from mmas.config import SCHEMA, ConfigError, RunConfig, load_config
from mmas.core import MatrixInterval, element_bounds
from mmas.families import make_family
from mmas.report import write_json, write_trace_csv, write_trace_plots
from mmas.simulate import (
    Divergence,
    PlantSchedule,
    Scenario,
    Steering,
    Trajectory,
    hull_coverage,
    simulate_scenario,
)
from mmas.tying import (
    NonMonotoneEntry,
    VertexModelSet,
    brute_force_min_cover,
    check_coordination,
    extremal_corners,
    scan_monotonicity,
    select_vertex_models,
)
from mmas.vehicle import UNCERTAIN, VehicleParams, to_display

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
PUBLISHED_MODEL_COUNT = 2
MODEL_COUNT_LIMIT = 4
U64_MAX = 2**64 - 1


class UsageError(Exception):
    pass


def _say(msg: str = "") -> None:
    print(msg, flush=True)


# --- shared construction --------------------------------------------------------------


def _vehicle_params(cfg: RunConfig, speed: float | None = None) -> VehicleParams:
    over = dict(cfg.system.vehicle)
    if speed is not None:
        over["u"] = speed
    try:
        return VehicleParams(**over)
    except TypeError as exc:
        raise UsageError(f"system.vehicle: {exc}") from None
    except ValueError as exc:
        raise UsageError(f"system.vehicle: {exc}") from None


def _system(cfg: RunConfig, speed: float | None = None):
    s = cfg.system
    try:
        return make_family(s.kind, s.lower, s.upper, _vehicle_params(cfg, speed), s.sign_convention, s.row3)
    except ValueError as exc:
        raise UsageError(f"system: {exc}") from None


def _box_dict(ps) -> dict:
    lo, hi = ps.box.lower, ps.box.upper
    if ps.name == "vehicle":
        lo, hi = to_display(lo), to_display(hi)
    return {"names": list(ps.box.names), "lower": lo, "upper": hi, "angle_units": "deg" if ps.name == "vehicle" else None}


# --- analyze -----------------------------------------------------------------------------


def cmd_analyze(cfg: RunConfig, out: Path, seed: int) -> int:
    a = cfg.analysis
    ps = _system(cfg)
    rep = scan_monotonicity(ps, grid=a.grid, cross_sections=a.cross_sections, tol=a.tol, seed=seed)
    report: dict = {
        "command": "analyze",
        "seed": seed,
        "system": {"kind": cfg.system.kind, "n": ps.n, "k": ps.box.k, "sign_convention": cfg.system.sign_convention, "row3": cfg.system.row3},
        "box": _box_dict(ps),
        "monotonicity": {
            "grid_density": rep.grid_density,
            "cross_sections": rep.cross_sections,
            "tol": rep.tol,
            "slack": rep.slack,
            "all_monotone": rep.all_monotone,
            "directions": rep.table(),
            "non_monotone": [
                {"parameter": ps.box.names[l], "entry": [i + 1, j + 1], "witness": rep.witnesses[(l, i, j)].__dict__ if (l, i, j) in rep.witnesses else None}
                for l, i, j in rep.non_monotone()
            ],
        },
    }
    lines = [f"analyze: {ps.name} (n={ps.n}, k={ps.box.k}), grid={a.grid}, cross-sections={a.cross_sections}+2, seed={seed}"]
    for row in report["monotonicity"]["non_monotone"]:
        w = row["witness"]
        lines.append(f"  NON_MONOTONE a{row['entry'][0]}{row['entry'][1]} in {row['parameter']}: witness rising {w['rising']} falling {w['falling']}" if w else
                     f"  NON_MONOTONE a{row['entry'][0]}{row['entry'][1]} in {row['parameter']}")

    status = EXIT_OK
    vs: VertexModelSet | None = None
    if rep.all_monotone:
        templates = extremal_corners(rep)
        report["templates"] = [
            {"entry": [i + 1, j + 1], "argmin": templates[i, j][0].label(), "argmax": templates[i, j][1].label()}
            for i in range(ps.n) for j in range(ps.n)
        ]
        try:
            vs = select_vertex_models(ps, templates, rank_tol=a.rank_tol)
        except Uncontrollable as exc:
            report["selection_error"] = str(exc)
            lines.append(f"  selection failed: {exc}")
            status = EXIT_FAIL
        if vs is not None:
            corners = [
                {"bits": c.label(), "assignment": c.label(ps.box.names), "controllability_ratio": controllability_ratio(s.A, s.B)}
                for c, s in zip(vs.corners, vs.systems)
            ]
            report["selection"] = {
                "model_count": len(vs),
                "corners": corners,
                "coverage": [{"entry": [e[0] + 1, e[1] + 1], "extreme": ext.value, "corner": idx} for (e, ext), idx in sorted(vs.coverage.items(), key=lambda kv: (kv[0][0], kv[0][1].value))],
                "full_corner_count": 2 ** ps.box.k,
            }
            lines.append(f"  selected {len(vs)} of {2 ** ps.box.k} corners:")
            lines += [f"    {c['bits']}  {c['assignment']}" for c in corners]
            if a.brute_force_cover and ps.box.k <= 6:
                bf = brute_force_min_cover(templates, ps.box.k)
                report["selection"]["brute_force_minimum"] = bf
                lines.append(f"  brute-force minimum cover: {bf}")
    else:
        lines.append("  corner extremality does not apply; no models selected")

    if ps.name == "vehicle":
        d = rep.directions[UNCERTAIN.index("theta_r"), 0, 2].value
        report["findings"] = {"A_13_vs_theta_r": d}
        lines.append(f"  A_13 vs theta_r: {d}")
        claim = {"published_target": PUBLISHED_MODEL_COUNT, "limit": MODEL_COUNT_LIMIT, "all_monotone": rep.all_monotone}
        if vs is not None:
            cov = hull_coverage(vs, samples=a.coverage_samples, seed=seed, vpn=_vehicle_params(cfg), tol=a.coverage_tol,
                                horizon=a.coverage_horizon, step=a.coverage_step,
                                sign_convention=cfg.system.sign_convention, row3=cfg.system.row3)
            claim.update(model_count=len(vs), selected=vs.corner_labels(), coverage=cov.as_dict())
            claim["matches_published"] = len(vs) == PUBLISHED_MODEL_COUNT
            claim["within_limit"] = len(vs) <= MODEL_COUNT_LIMIT
            if not claim["matches_published"]:
                claim["discrepancy"] = (f"selected {len(vs)} models, published count is {PUBLISHED_MODEL_COUNT}: "
                                        "cornering stiffnesses drive some entries to their extremes at equal-level corners and others at opposite-level corners")
            lines.append(f"  model count {len(vs)} (published {PUBLISHED_MODEL_COUNT}, limit {MODEL_COUNT_LIMIT})")
            lines.append(f"  hull coverage: {cov.covered}/{cov.samples} = {cov.fraction:.4f} (yaw residual <= {cov.tol:g} relative)")
            if not claim["matches_published"]:
                lines.append(f"  DISCREPANCY: {claim['discrepancy']}")
        if not (rep.all_monotone and vs is not None and len(vs) <= MODEL_COUNT_LIMIT):
            status = EXIT_FAIL
        report["model_count_claim"] = claim

    coord = []
    for p in a.coordination:
        if p.parameter not in ps.box.names:
            raise UsageError(f"analysis.coordination: unknown parameter {p.parameter!r}")
        if max(p.entry_a + p.entry_b) > ps.n:
            raise UsageError(f"analysis.coordination: entry index beyond n={ps.n}")
        v = check_coordination(ps, ps.box.index(p.parameter), tuple(x - 1 for x in p.entry_a), tuple(x - 1 for x in p.entry_b),
                               grid=a.coordination_grid, tol=a.coordination_tol)
        d = v.as_dict()
        d["parameter"] = p.parameter
        d["entry_a"], d["entry_b"] = p.entry_a, p.entry_b
        coord.append(d)
        held = [k for k in ("affine", "functional", "symmetry", "critical_points") if d[k]["status"] == "HOLDS"]
        lines.append(f"  coordination {p.parameter}: a{p.entry_a} ~ a{p.entry_b}: {', '.join(held) or 'none'}")
    report["coordination"] = coord

    write_json(out / "analyze_report.json", report)
    (out / "analyze_report.txt").write_text("\n".join(lines) + "\n")
    for ln in lines:
        _say(ln)
    return status


# --- bounds ------------------------------------------------------------------------------


def cmd_bounds(cfg: RunConfig, out: Path, seed: int) -> int:
    b = cfg.bounds
    if b.source == "explicit":
        try:
            mi = MatrixInterval(b.lb, b.ub)
        except ValueError as exc:
            raise UsageError(f"bounds: {exc}") from None
        origin = "explicit"
    else:
        ps = _system(cfg)
        rep = scan_monotonicity(ps, grid=cfg.analysis.grid, cross_sections=cfg.analysis.cross_sections, tol=cfg.analysis.tol, seed=seed)
        try:
            mi = element_bounds(ps, rep)
        except ValueError as exc:
            raise UsageError(f"bounds: {exc}") from None
        origin = f"element_bounds({ps.name})"
    try:
        bounds = all_coeff_bounds(mi, literal=b.literal)
        det = det_bounds(mi, literal=b.literal)
    except DimensionTooLarge as exc:
        raise UsageError(f"bounds: {exc}") from None
    rng = np.random.default_rng(seed)
    cont = sampled_containment(mi, rng, samples=b.samples, rtol=b.rtol, bounds=bounds)

    report = {
        "command": "bounds",
        "seed": seed,
        "source": origin,
        "literal": b.literal,
        "interval": {"lb": mi.lb, "ub": mi.ub},
        "det_bounds": list(det),
        "containment": cont.as_dict(),
        "total_violations": cont.total_violations,
    }
    lines = [f"bounds: {origin}, n={mi.n}, literal={b.literal}, samples={b.samples}, rtol={b.rtol:g}"]
    lines.append(f"  det in [{det[0]:.6g}, {det[1]:.6g}]")
    for k in range(mi.n):
        lines.append(f"  c_{k} in [{bounds.lb[k]:.6g}, {bounds.ub[k]:.6g}]  sampled [{cont.sample_min[k]:.6g}, {cont.sample_max[k]:.6g}]  violations {int(cont.violations[k])}")
    if np.array_equal(mi.lb, mi.ub):
        c = char_coeffs(mi.lb)
        gap = float(np.max(np.maximum(np.abs(bounds.lb - c), np.abs(bounds.ub - c)) / np.maximum(np.abs(c), 1.0)))
        report["point_interval"] = {"char_coeffs": c, "max_relative_gap": gap, "exact": gap <= 1e-10}
        lines.append(f"  point interval: bounds equal char_coeffs within {gap:.3g} relative ({'exact' if gap <= 1e-10 else 'MISMATCH'})")
    lines.append(f"  total violations: {cont.total_violations}")
    write_json(out / "bounds_report.json", report)
    (out / "bounds_report.txt").write_text("\n".join(lines) + "\n")
    for ln in lines:
        _say(ln)
    failed = cont.total_violations > 0 or ("point_interval" in report and not report["point_interval"]["exact"])
    return EXIT_FAIL if failed else EXIT_OK


# --- simulate ------------------------------------------------------------------------------


def _scenario(cfg: RunConfig, seed: int) -> Scenario:
    s = cfg.scenario
    try:
        params = {}
        for name, tc in s.schedule.params.items():
            params[name] = Trajectory(tc.kind, tc.value, tc.amplitude, tc.frequency_hz, tc.phase, tc.start, tc.end,
                                      tc.t0, tc.t1, tuple(tc.times), tuple(tc.values))
        sched = PlantSchedule(params=params, mixture=None if s.schedule.mixture is None else tuple(s.schedule.mixture))
        st = s.steering
        return Scenario(
            speed=s.speed_kmh / 3.6,
            steering=Steering(st.kind, st.amplitude_deg, st.frequency_hz, st.end_frequency_hz, st.t_start),
            horizon=s.horizon,
            step=s.step,
            schedule=sched,
            seed=seed,
            disturbance=s.disturbance_deg,
            weight_lambda=s.weight_lambda,
            deadband_factor=s.deadband_factor,
        )
    except ValueError as exc:
        raise UsageError(f"scenario: {exc}") from None


def _subset(vs: VertexModelSet, labels: list[str] | None) -> VertexModelSet:
    if labels is None:
        return vs
    have = [c.label() for c in vs.corners]
    missing = [l for l in labels if l not in have]
    if missing:
        raise UsageError(f"scenario.models: {missing} not among selected corners {have}")
    idx = [have.index(l) for l in labels]
    if len(idx) < 2:
        raise UsageError("scenario.models: need at least two models")
    return VertexModelSet([vs.corners[i] for i in idx], [vs.systems[i] for i in idx], [vs.canonical[i] for i in idx], {}, vs.box)


def cmd_simulate(cfg: RunConfig, out: Path, seed: int) -> int:
    if cfg.system.kind != "vehicle":
        raise UsageError("simulate: only the vehicle system can be simulated")
    sc = _scenario(cfg, seed)
    vpn = _vehicle_params(cfg, sc.speed)
    ps = make_family("vehicle", vehicle=vpn, sign_convention=cfg.system.sign_convention, row3=cfg.system.row3)
    a = cfg.analysis
    vs = select_vertex_models(ps, extremal_corners(scan_monotonicity(ps, grid=a.grid, cross_sections=a.cross_sections, tol=a.tol, seed=seed)), a.rank_tol)
    vs = _subset(vs, cfg.scenario.models)
    if sc.schedule.mixture is not None and len(sc.schedule.mixture) != len(vs):
        raise UsageError(f"scenario.schedule.mixture: {len(sc.schedule.mixture)} weights for {len(vs)} models")

    status = EXIT_OK
    divergence = None
    try:
        tr = simulate_scenario(sc, vs, vpn=vpn, sign_convention=cfg.system.sign_convention, row3=cfg.system.row3)
    except Divergence as exc:
        tr = exc.trace
        divergence = exc.t
        status = EXIT_FAIL
    write_trace_csv(out / "trace.csv", tr)
    plots = write_trace_plots(out, tr) if len(tr) > 1 else []

    codes = tr.verdict
    outside = np.flatnonzero(codes == -1)
    intervals = []
    if outside.size:
        start = prev = outside[0]
        for k in outside[1:]:
            if k != prev + 1:
                intervals.append([float(tr.t[start]), float(tr.t[prev])])
                start = k
            prev = k
        intervals.append([float(tr.t[start]), float(tr.t[prev])])
    report = {
        "command": "simulate",
        "seed": seed,
        "speed_kmh": cfg.scenario.speed_kmh,
        "steps": len(tr),
        "models": vs.corner_labels() if vs.corners else None,
        "divergence_t": divergence,
        "verdict_counts": {name: int(np.count_nonzero(codes == c)) for name, c in (("INSIDE", 1), ("BOUNDARY", 0), ("OUTSIDE", -1))},
        "outside_intervals": intervals,
        "max_relative_residual": float(tr.relative_residual().max()) if len(tr) else 0.0,
        "final_weights": tr.weights[-1] if len(tr) else [],
        "out_of_box_steps": int(np.count_nonzero(~tr.in_box)),
        "files": ["trace.csv", *plots],
    }
    write_json(out / "simulate_report.json", report)
    _say(f"simulate: {len(tr)} steps, {len(vs)} models, verdicts {report['verdict_counts']}")
    if intervals:
        _say(f"  OUTSIDE intervals: {intervals[:5]}{' ...' if len(intervals) > 5 else ''}")
    if divergence is not None:
        _say(f"  DIVERGED at t = {divergence:.6g} s; partial trace written")
    return status


# --- verify ----------------------------------------------------------------------------------


def cmd_verify(cfg: RunConfig, out: Path, seed: int) -> int:
    from mmas.suites import SUITES, run_suites, sizes_for

    v = cfg.verify
    sizes = sizes_for(v.smoke, v.instances, v.samples, v.scenarios, v.corrupt_s)
    names = v.suites
    if names is not None:
        bad = [n for n in names if n not in SUITES]
        if bad:
            raise UsageError(f"verify.suites: unknown {bad}; available {list(SUITES)}")
    t0 = time.perf_counter()
    results = run_suites(seed, sizes, names, progress=lambda n: _say(f"  running {n} ..."))
    elapsed = time.perf_counter() - t0
    total_fail = sum(r.failed for r in results)
    report = {
        "command": "verify",
        "seed": seed,
        "mode": "smoke" if v.smoke else "default",
        "sizes": sizes.__dict__,
        "suites": [r.as_dict() for r in results],
        "passed": sum(r.passed for r in results),
        "failed": total_fail,
    }
    write_json(out / "verify_report.json", report)
    lines = []
    for r in results:
        lines.append(f"{'PASS' if r.failed == 0 else 'FAIL'}  {r.name}: {r.passed} passed, {r.failed} failed")
        for c in r.checks:
            if not c.ok:
                lines.append(f"      x {c.name}: {c.value} (limit {c.limit}){'  ' + c.note if c.note else ''}")
    lines.append(f"total: {report['passed']} passed, {total_fail} failed")
    (out / "verify_summary.txt").write_text("\n".join(lines) + "\n")
    for ln in lines:
        _say(ln)
    _say(f"(elapsed {elapsed:.1f} s; not part of the report)")
    return EXIT_FAIL if total_fail else EXIT_OK


# --- entry point --------------------------------------------------------------------------------

COMMANDS = {"analyze": cmd_analyze, "bounds": cmd_bounds, "simulate": cmd_simulate, "verify": cmd_verify}


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text!r}") from None
    if not 0 <= v <= U64_MAX:
        raise argparse.ArgumentTypeError(f"seed must be in [0, 2^64 - 1], got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mmas", description="Vertex-model reduction and multiple-model estimation harness.")
    p.add_argument("--version", action="version", version=f"mmas {__version__} (config schema {SCHEMA})")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON config file")
        sp.add_argument("--out", required=True, help="output directory (created if missing)")
        sp.add_argument("--seed", type=_seed, default=0, help="unsigned 64-bit seed (default 0)")
        sp.add_argument("--sign-convention", choices=("printed", "standard"))
        sp.add_argument("--row3", choices=("kinematic", "printed"))
        if name in ("analyze", "bounds"):
            sp.add_argument("--grid", type=int, help="monotonicity samples per axis")
        if name == "analyze":
            sp.add_argument("--coverage-samples", type=int)
        if name == "bounds":
            sp.add_argument("--literal", action="store_true", help="endpoint-product rule instead of interval products")
            sp.add_argument("--samples", type=int)
        if name == "simulate":
            sp.add_argument("--speed-kmh", type=float)
            sp.add_argument("--horizon", type=float)
            sp.add_argument("--step", type=float)
        if name == "verify":
            sp.add_argument("--smoke", action="store_true", help="reduced sizes, under a minute")
            sp.add_argument("--suite", action="append", dest="suites", help="run only this suite (repeatable)")
            sp.add_argument("--corrupt-s", action="store_true", help="inject a corrupted S_i into the transform suite")
    return p


def _apply_overrides(cfg: RunConfig, ns: argparse.Namespace) -> RunConfig:
    sys_over = {k: getattr(ns, a) for k, a in (("sign_convention", "sign_convention"), ("row3", "row3")) if getattr(ns, a, None) is not None}
    if sys_over:
        cfg = replace(cfg, system=replace(cfg.system, **sys_over))
    if getattr(ns, "grid", None) is not None:
        if ns.grid < 3:
            raise UsageError("--grid must be >= 3")
        cfg = replace(cfg, analysis=replace(cfg.analysis, grid=ns.grid))
    if getattr(ns, "coverage_samples", None) is not None:
        cfg = replace(cfg, analysis=replace(cfg.analysis, coverage_samples=ns.coverage_samples))
    if getattr(ns, "literal", False):
        cfg = replace(cfg, bounds=replace(cfg.bounds, literal=True))
    if getattr(ns, "samples", None) is not None:
        if ns.samples < 2:
            raise UsageError("--samples must be >= 2")
        cfg = replace(cfg, bounds=replace(cfg.bounds, samples=ns.samples))
    sc_over = {k: getattr(ns, k) for k in ("speed_kmh", "horizon", "step") if getattr(ns, k, None) is not None}
    if sc_over:
        cfg = replace(cfg, scenario=replace(cfg.scenario, **sc_over))
        if not cfg.scenario.step > 0 or cfg.scenario.horizon < 10 * cfg.scenario.step or not cfg.scenario.speed_kmh > 0:
            raise UsageError("scenario overrides: need step > 0, horizon >= 10 steps, speed > 0")
    v_over = {}
    if getattr(ns, "smoke", False):
        v_over["smoke"] = True
    if getattr(ns, "suites", None):
        v_over["suites"] = ns.suites
    if getattr(ns, "corrupt_s", False):
        v_over["corrupt_s"] = True
    if v_over:
        cfg = replace(cfg, verify=replace(cfg.verify, **v_over))
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = _apply_overrides(load_config(ns.config), ns)
        out = Path(ns.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
            probe = out / ".write-test"
            probe.write_text("")
            probe.unlink()
        except OSError as exc:
            raise UsageError(f"--out {out}: not writable ({exc.strerror})") from None
        return COMMANDS[ns.command](cfg, out, ns.seed)
    except (ConfigError, UsageError) as exc:
        print(f"mmas {ns.command}: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonMonotoneEntry as exc:
        print(f"mmas {ns.command}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
