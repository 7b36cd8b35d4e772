"""Property suites behind ``mmas verify``.

Each suite returns a list of :class:`Check` records.  A check carries the
measured value and the limit it was held to, so a failing suite says by how
much.  Sizes come from :class:`Sizes`; the smoke preset trades sample counts
for a sub-minute run.  Reports contain no timings, so identical seeds give
byte-identical output.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Callable

import numpy as np

from mmas import experiments as ex
from mmas import oracles
from mmas.canonical import Uncontrollable, char_coeffs, companion, to_canonical
from mmas.charpoly_bounds import all_coeff_bounds
from mmas.core import MatrixInterval, element_bounds, eval_at_corner, Corner
from mmas.families import make_family
from mmas.simulate import Scenario, Steering, hull_coverage, simulate_scenario
from mmas.transform import build_transform_bundle, reconstruct_canonical_plant
from mmas.tying import (
    Direction,
    brute_force_min_cover,
    check_affine,
    extremal_corners,
    scan_monotonicity,
    select_vertex_models,
)
from mmas.vehicle import (
    TABLE_LOWER,
    VehicleParams,
    batch_vehicle_matrices,
    build_vehicle_system,
    make_uncertain_vehicle,
    table_box,
)
from mmas.weights import Inclusion, inclusion_criterion, solve_weights


@dataclass
class Check:
    name: str
    ok: bool
    value: object = None
    limit: object = None
    note: str = ""


@dataclass
class SuiteResult:
    name: str
    checks: list[Check] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def passed(self) -> int:
        return sum(c.ok for c in self.checks)

    @property
    def failed(self) -> int:
        return sum(not c.ok for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "suite": self.name,
            "passed": self.passed,
            "failed": self.failed,
            "checks": [asdict(c) for c in self.checks],
            "info": self.info,
        }


@dataclass(frozen=True)
class Sizes:
    random_pairs: int = 1000
    interval_families: int = 10
    interval_samples: int = 10_000
    point_matrices: int = 1000
    transform_instances: int = 1000
    weight_cases: int = 500
    scenarios: int = 100
    coverage_samples: int = 10_000
    corrupt_s: bool = False

    @classmethod
    def smoke(cls) -> Sizes:
        return cls(
            random_pairs=100,
            interval_families=10,
            interval_samples=1000,
            point_matrices=100,
            transform_instances=100,
            weight_cases=100,
            scenarios=4,
            coverage_samples=1000,
        )


def _le(name, value, limit, note="") -> Check:
    return Check(name, bool(value <= limit), float(value), float(limit), note)


# --- model-core -------------------------------------------------------------------


def suite_model_core(seed: int, sz: Sizes) -> SuiteResult:
    r = SuiteResult("model-core")
    for kind in ("vehicle", "diagonal", "conflict", "tied", "rotation"):
        ps = make_family(kind)
        mi = element_bounds(ps, scan_monotonicity(ps))
        lo, hi = oracles.corner_extremes(ps)
        gap = max(float(np.abs(mi.lb - lo).max()), float(np.abs(mi.ub - hi).max()))
        r.checks.append(_le(f"element_bounds == corner enumeration [{kind}]", gap, 0.0))

    rng = np.random.default_rng([seed, 10])
    ps = make_uncertain_vehicle()
    mi = element_bounds(ps, scan_monotonicity(ps))
    m = table_box().sample(rng, 1000)
    A, _ = batch_vehicle_matrices(VehicleParams(), m)
    over = max(float((A - mi.ub).max()), float((mi.lb - A).max()))
    r.checks.append(_le("sampled entries within element bounds (1e-12)", over, 1e-12))

    m0 = table_box().sample(rng, 1)[0]
    a, b = ps.eval(m0), ps.eval(m0)
    r.checks.append(Check("eval determinism (bitwise)", bool(np.array_equal(a.A, b.A) and np.array_equal(a.B, b.B))))

    low = eval_at_corner(ps, Corner.all_low(6))
    ref = build_vehicle_system(VehicleParams(C_af=TABLE_LOWER["C_af"], C_ar=TABLE_LOWER["C_ar"], k_phi=TABLE_LOWER["k_phi"],
                                             c_phi=TABLE_LOWER["c_phi"], phi_r=0.0, theta_r=0.0))
    r.checks.append(Check("all-LOW corner substitutes the lower table values", bool(np.array_equal(low.A, ref.A))))
    return r


# --- canonical ---------------------------------------------------------------------


def suite_canonical(seed: int, sz: Sizes) -> SuiteResult:
    r = SuiteResult("canonical")
    rng = np.random.default_rng([seed, 20])
    worst_cp = 0.0
    for t in range(max(sz.random_pairs // 4, 10)):
        n = 1 + t % 5
        A = rng.normal(size=(n, n))
        c, ref = char_coeffs(A), oracles.cofactor_charpoly(A)
        worst_cp = max(worst_cp, float(np.abs(c - ref).max() / max(np.abs(ref).max(), 1.0)))
    r.checks.append(_le("char_coeffs vs cofactor expansion (relative)", worst_cp, 1e-10))

    worst_rt = worst_struct = worst_theta = worst_sim = 0.0
    for t in range(sz.random_pairs):
        n = 2 + t % 4
        A, b = ex.random_controllable_pair(rng, n)
        cf = to_canonical(A, b)
        nA = np.abs(A).sum(axis=1).max()
        rt = np.abs(cf.T @ A @ cf.T_inv - cf.A_bar).sum(axis=1).max()
        worst_rt = max(worst_rt, float(rt / nA))
        worst_struct = max(worst_struct, float(np.abs(cf.A_bar[:-1] - np.eye(n, k=1)[:-1]).max()))
        worst_theta = max(worst_theta, float(np.abs(cf.A_bar[-1] + cf.theta).max()))
        Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
        Tm = Q @ np.diag(rng.uniform(0.5, 2.0, n))
        c1, c2 = char_coeffs(A), char_coeffs(Tm @ A @ np.linalg.inv(Tm))
        worst_sim = max(worst_sim, float(np.abs(c1 - c2).max() / max(np.abs(c1).max(), 1.0)))
    r.checks.append(_le("round trip ||T A T^-1 - A_bar|| / ||A|| (inf-norm)", worst_rt, 1e-8))
    r.checks.append(_le("companion structure rows 1..n-1", worst_struct, 1e-9))
    r.checks.append(_le("last row equals -theta", worst_theta, 0.0))
    r.checks.append(_le("similarity invariance of coefficients", worst_sim, 1e-8))

    Ac, bc = oracles.companion_pair([2.0, 3.0, 1.5])
    fixed = to_canonical(Ac, bc)
    r.checks.append(_le("companion input is a fixed point (T = I)", float(np.abs(fixed.T - np.eye(3)).max()), 1e-9))
    try:
        to_canonical(np.diag([-1.0, -2.0]), [1.0, 0.0])
        r.checks.append(Check("decoupled mode raises Uncontrollable", False))
    except Uncontrollable:
        r.checks.append(Check("decoupled mode raises Uncontrollable", True))
    r.info["controllable_pair_min_ratio"] = 1e-3
    return r


# --- charpoly-bounds ------------------------------------------------------------------


def suite_charpoly(seed: int, sz: Sizes) -> SuiteResult:
    r = SuiteResult("charpoly-bounds")
    rows = ex.containment_suite(seed, sz.interval_families, sz.interval_samples)
    total = sum(row["total_violations"] for row in rows)
    r.checks.append(_le(f"sampled containment, {len(rows)} families x {sz.interval_samples}", total, 0))
    r.info["containment"] = [{k: row[k] for k in ("family", "n", "total_violations", "slack_lower", "slack_upper")} for row in rows]

    pe = ex.point_exactness(seed, sz.point_matrices)
    r.checks.append(_le("point interval reproduces char_coeffs (relative)", pe["worst_relative"], 1e-10))

    rng = np.random.default_rng([seed, 30])
    shrunk = 0
    for t in range(50):
        mi = ex.random_interval(rng, 2 + t % 3)
        wide = MatrixInterval(mi.lb - rng.uniform(0, 0.5, mi.lb.shape), mi.ub + rng.uniform(0, 0.5, mi.ub.shape))
        b0, b1 = all_coeff_bounds(mi), all_coeff_bounds(wide)
        shrunk += int(np.any(b1.lb > b0.lb + 1e-12 * np.maximum(1, np.abs(b0.lb))) or np.any(b1.ub < b0.ub - 1e-12 * np.maximum(1, np.abs(b0.ub))))
    r.checks.append(_le("widening never shrinks a coefficient bound (50 pairs)", shrunk, 0))

    lit = ex.containment_suite(seed, 0, sz.interval_samples, literal=True)[0]
    r.info["literal_endpoint_rule_vehicle_violations"] = lit["total_violations"]
    return r


# --- parameter-tying ----------------------------------------------------------------------


def suite_tying(seed: int, sz: Sizes) -> SuiteResult:
    r = SuiteResult("parameter-tying")
    ps = make_uncertain_vehicle()
    rep = scan_monotonicity(ps, seed=seed)
    r.checks.append(Check("vehicle entries monotone in every parameter", rep.all_monotone))
    r.checks.append(Check("A_13 decreasing in theta_r", rep.directions[5, 0, 2] == Direction.DECREASING))
    templates = extremal_corners(rep)

    # corner extremality against a 5^6 grid
    grid = oracles.grid_points(ps.box, 5)
    A, _ = batch_vehicle_matrices(VehicleParams(), grid)
    worst = 0.0
    for i in range(4):
        for j in range(4):
            tmin, tmax = templates[i, j]
            vmin = ps.eval(tmin.fill(ps.box)).A[i, j]
            vmax = ps.eval(tmax.fill(ps.box)).A[i, j]
            scale = max(abs(vmin), abs(vmax), 1e-300)
            worst = max(worst, float((A[:, i, j].max() - vmax) / scale), float((vmin - A[:, i, j].min()) / scale))
    r.checks.append(_le("grid extremes attained at template corners (relative)", worst, 1e-12))

    vs = select_vertex_models(ps, templates)
    bad = 0
    for (entry, ext), idx in vs.coverage.items():
        t = templates[entry][0 if ext.value == "MIN" else 1]
        bad += not t.matches(vs.corners[idx])
    r.checks.append(_le("every requirement maps to a matching corner", bad, 0))
    vs2 = select_vertex_models(ps, extremal_corners(scan_monotonicity(ps, seed=seed)))
    r.checks.append(Check("selection is deterministic", vs.corner_labels() == vs2.corner_labels()))
    r.info["vehicle_selected"] = [c.label() for c in vs.corners]

    for kind, expect in (("tied", 2), ("rotation", None), ("conflict", None), ("diagonal", None)):
        fam = make_family(kind)
        t = extremal_corners(scan_monotonicity(fam))
        greedy = len(select_vertex_models(fam, t))
        brute = brute_force_min_cover(t, fam.box.k)
        r.checks.append(Check(f"greedy cover size == brute-force minimum [{kind}]", greedy == brute, greedy, brute))
        if expect is not None:
            r.checks.append(Check(f"fully tied family selects {expect} corners", greedy == expect, greedy, expect))

    par = scan_monotonicity(make_family("parabola"))
    r.checks.append(Check("parabola entry reported NON_MONOTONE with witness", (0, 0, 0) in par.witnesses))

    rng = np.random.default_rng([seed, 40])
    unsound = 0
    for _ in range(100):
        g1 = np.cumsum(rng.normal(size=21))
        alpha = rng.choice([-1, 1]) * rng.uniform(0.1, 5)
        g2 = alpha * g1 + rng.normal()
        res = check_affine(g1, g2, 1e-6)
        if res.holds:
            a1, a2 = int(np.argmax(g1)), int(np.argmax(g2))
            unsound += not (a1 == a2 if alpha > 0 else a1 == int(np.argmin(g2)))
        else:
            unsound += 1
    r.checks.append(_le("affine verdict holds and extremes align (100 pairs)", unsound, 0))
    return r


# --- weights -----------------------------------------------------------------------------


def suite_weights(seed: int, sz: Sizes) -> SuiteResult:
    r = SuiteResult("weights")
    cases = [([1.0, -1.0], [0.5, 0.5]), ([2.0, -1.0], [1 / 3, 2 / 3]), ([1.0, 2.0], [1.0, 0.0])]
    worst = max(float(np.abs(solve_weights(E).w - np.array(w)).max()) for E, w in cases)
    r.checks.append(_le("single-channel closed-form examples", worst, 1e-9))
    v = [inclusion_criterion([0.3, -0.2], 1e-6).status, inclusion_criterion([0.3, 0.2]).status, inclusion_criterion([0.0, 0.5]).status]
    r.checks.append(Check("inclusion examples INSIDE/OUTSIDE/BOUNDARY", v == [Inclusion.INSIDE, Inclusion.OUTSIDE, Inclusion.BOUNDARY]))

    rng = np.random.default_rng([seed, 50])
    simplex_bad = scale_gap = opt_gap = unsound = 0.0
    for t in range(sz.weight_cases):
        rows, N = 1 + t % 3, 2 + t % 4
        E = rng.normal(size=(rows, N)) * 10.0 ** rng.uniform(-6, 6)
        sol = solve_weights(E)
        simplex_bad = max(simplex_bad, float(max(-sol.w.min(), abs(sol.w.sum() - 1.0))))
        s2 = solve_weights(E * 10.0 ** rng.uniform(-5, 5))
        scale_gap = max(scale_gap, float(np.abs(sol.w - s2.w).max()) if sol.residual > 0 else 0.0)
        wo = oracles.simplex_lsq(E)
        nE = np.linalg.norm(E)
        opt_gap = max(opt_gap, (sol.residual - np.linalg.norm(E @ wo)) / nE)
        if inclusion_criterion(E).status == Inclusion.OUTSIDE and oracles.hull_feasible(E):
            unsound += 1
    r.checks.append(_le("weights on the simplex (sum within 1e-12)", simplex_bad, 1e-12))
    r.checks.append(_le("scale invariance of w", scale_gap, 1e-6))
    r.checks.append(_le("residual no worse than NNLS oracle (relative)", opt_gap, 1e-6))
    r.checks.append(_le("OUTSIDE implies 0 not in hull (LP)", unsound, 0))
    return r


# --- weight-transform ---------------------------------------------------------------------


def suite_transform(seed: int, sz: Sizes) -> SuiteResult:
    r = SuiteResult("weight-transform")
    tr = ex.transform_trials(seed, sz.transform_instances, corrupt=sz.corrupt_s)
    r.info["trials"] = tr
    r.checks.append(_le("sum_i w_i S_i = I", tr["sum_identity_max"], 1e-9))
    r.checks.append(_le("reconstruction matches direct canonicalization (relative)", tr["oracle_residual_max"], 1e-8,
                        "fails by construction: the reconstruction equals T_p A_mix T_p^-1, companion only when T_p is the mixed pair's own transform"))
    r.checks.append(_le("reconstruction is similar to the mixed system (char. poly.)", tr["charpoly_residual_max"], 1e-6))

    rng = np.random.default_rng([seed, 60])
    worst = 0.0
    for t in range(30):
        n, N = 2 + t % 3, 2 + t % 3
        models = [to_canonical(*ex.random_controllable_pair(rng, n)) for _ in range(N)]
        i = t % N
        w = np.zeros(N)
        w[i] = 1.0
        A_bar, _, _ = reconstruct_canonical_plant(build_transform_bundle(models, w), models)
        worst = max(worst, float(np.abs(A_bar - models[i].A_bar).max() / max(np.abs(models[i].A_bar).max(), 1.0)))
    r.checks.append(_le("one-hot w reproduces the vertex canonical form", worst, 1e-10))

    neg = ex.transform_trials(seed, 5, corrupt=True)
    r.checks.append(Check("negative control: corrupted S_i is flagged", neg["sum_identity_max"] > 1e-6, neg["sum_identity_max"], 1e-6))
    return r


# --- vehicle / simulation -----------------------------------------------------------------


def suite_vehicle(seed: int, sz: Sizes) -> SuiteResult:
    r = SuiteResult("vehicle-demo")
    rng = np.random.default_rng([seed, 70])
    m = table_box().sample(rng, 200)
    vpn = VehicleParams()
    gap = 0.0
    for conv in ("printed", "standard"):
        A, B = batch_vehicle_matrices(vpn, m, conv)
        for k in range(len(m)):
            s = build_vehicle_system(vpn.with_uncertain(m[k]), conv)
            gap = max(gap, float(np.abs(s.A - A[k]).max() / np.abs(s.A).max()), float(np.abs(s.B[:, 0] - B[k]).max() / np.abs(s.B).max()))
    r.checks.append(_le("two independent formula implementations agree", gap, 1e-14))

    a1 = build_vehicle_system(VehicleParams(u=15.0))
    a2 = build_vehicle_system(VehicleParams(u=30.0))
    r.checks.append(Check("A_21 independent of u, A_22 halves when u doubles",
                          bool(a1.A[1, 0] == a2.A[1, 0] and abs(a2.A[1, 1] - a1.A[1, 1] / 2) <= 1e-15 * abs(a1.A[1, 1]))))

    models = ex.vehicle_models()
    zero = simulate_scenario(Scenario(steering=Steering("zero"), horizon=0.5), models)
    r.checks.append(Check("zero input gives an all-zero trace", bool(not zero.x_plant.any() and not zero.x_models.any())))

    for row in ex.rk4_orders():
        r.checks.append(Check(f"RK4 step-halving ratio at {row['speed_kmh']:g} km/h in [8, 32]", 8 <= row["ratio"] <= 32, row["ratio"], [8, 32]))

    rec = ex.weight_recovery()
    r.info["weight_recovery"] = rec
    r.checks.append(_le("weight recovery |w - w*| after 1 s", rec["weight_error_after_settle"], 1e-3,
                        "matrix-mixture plants do not evolve as the state mixture of the models"))
    r.checks.append(_le("full-state relative RMSE on a hull plant", rec["full_state_relative_rmse"], 1e-6))
    return r


def suite_inclusion(seed: int, sz: Sizes) -> SuiteResult:
    r = SuiteResult("inclusion-study")
    models = ex.vehicle_models()
    st = ex.run_inclusion_study(models, sz.scenarios, sz.scenarios, seed)
    r.checks.append(Check("in-hull plants: never OUTSIDE, residual <= 1e-8 relative", st["forward_pass"] == st["forward_total"],
                          st["forward_pass"], st["forward_total"]))
    r.checks.append(Check("excursions: OUTSIDE fires in >= 95 %", st["backward_rate"] >= 0.95, st["backward_rate"], 0.95))
    r.info["missed_excursions"] = [o for o in st["backward"] if not o["passed"]]
    r.info["worst_forward_residual"] = max(o["detail"]["max_relative_residual"] for o in st["forward"])

    cov = hull_coverage(models, samples=sz.coverage_samples, seed=seed)
    r.info["model_count"] = len(models)
    r.info["selected_corners"] = models.corner_labels()
    r.info["coverage"] = cov.as_dict()
    r.checks.append(Check("vehicle model count <= 4 (published target 2)", len(models) <= 4, len(models), 4))
    return r


SUITES: dict[str, Callable[[int, Sizes], SuiteResult]] = {
    "model-core": suite_model_core,
    "canonical": suite_canonical,
    "charpoly-bounds": suite_charpoly,
    "parameter-tying": suite_tying,
    "weights": suite_weights,
    "weight-transform": suite_transform,
    "vehicle-demo": suite_vehicle,
    "inclusion-study": suite_inclusion,
}


def run_suites(seed: int, sizes: Sizes, names: list[str] | None = None, progress: Callable[[str], None] | None = None) -> list[SuiteResult]:
    names = list(SUITES) if names is None else names
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suites {unknown}; available: {list(SUITES)}")
    out = []
    for n in names:
        if progress:
            progress(n)
        out.append(SUITES[n](seed, sizes))
    return out


def sizes_for(smoke: bool, instances: int | None = None, samples: int | None = None, scenarios: int | None = None,
              corrupt_s: bool = False) -> Sizes:
    s = Sizes.smoke() if smoke else Sizes()
    upd = {}
    if instances is not None:
        upd.update(random_pairs=instances, point_matrices=instances, transform_instances=instances, weight_cases=instances)
    if samples is not None:
        upd.update(interval_samples=samples, coverage_samples=samples)
    if scenarios is not None:
        upd["scenarios"] = scenarios
    upd["corrupt_s"] = corrupt_s
    return replace(s, **upd)
