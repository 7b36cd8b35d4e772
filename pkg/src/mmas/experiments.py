"""Reusable experiment drivers shared by the verify suites, tests and scripts."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from mmas.canonical import controllability_ratio, to_canonical
from mmas.charpoly_bounds import all_coeff_bounds, sampled_containment
from mmas.core import MatrixInterval, element_bounds
from mmas.simulate import (
    PlantSchedule,
    Scenario,
    Steering,
    Trajectory,
    integrate_plant,
    rk4_order_ratio,
    simulate_scenario,
)
from mmas.transform import build_transform_bundle, reconstruct_canonical_plant, verify_companion_consistency
from mmas.tying import VertexModelSet, extremal_corners, scan_monotonicity, select_vertex_models
from mmas.vehicle import TABLE_LOWER, TABLE_UPPER, UNCERTAIN, YAW, VehicleParams, make_uncertain_vehicle

# --- random instances ------------------------------------------------------------


def random_interval(rng: np.random.Generator, n: int) -> MatrixInterval:
    """Random interval matrix mixing sign-definite and sign-indefinite entries."""
    centre = rng.normal(size=(n, n))
    width = rng.uniform(0.0, 1.5, size=(n, n)) * (rng.random((n, n)) < 0.8)
    return MatrixInterval(centre - width, centre + width)


def random_controllable_pair(rng: np.random.Generator, n: int, min_ratio: float = 1e-3) -> tuple[np.ndarray, np.ndarray]:
    """Random (A, b) whose controllability singular-value ratio is at least ``min_ratio``."""
    for _ in range(1000):
        A = rng.normal(size=(n, n))
        b = rng.normal(size=n)
        if controllability_ratio(A, b) >= min_ratio:
            return A, b
    raise RuntimeError("could not draw a well-conditioned controllable pair")


# --- charpoly bounds --------------------------------------------------------------


def vehicle_interval(sign_convention: str = "printed", row3: str = "kinematic") -> MatrixInterval:
    ps = make_uncertain_vehicle(sign_convention=sign_convention, row3=row3)
    return element_bounds(ps, scan_monotonicity(ps))


def containment_suite(seed: int, families: int = 10, samples: int = 10_000, rtol: float = 1e-12, literal: bool = False) -> list[dict]:
    rng = np.random.default_rng(seed)
    cases = [("vehicle", vehicle_interval())]
    for f in range(families):
        n = (2, 3, 4)[f % 3]
        cases.append((f"random-{f}-n{n}", random_interval(rng, n)))
    out = []
    for name, mi in cases:
        rep = sampled_containment(mi, rng, samples=samples, rtol=rtol, literal=literal)
        out.append({"family": name, "n": mi.n, **rep.as_dict(), "total_violations": rep.total_violations})
    return out


def point_exactness(seed: int, count: int = 1000, sizes=(2, 3, 4, 5)) -> dict:
    """Worst relative gap between point-interval bounds and Faddeev-LeVerrier coefficients.

    The scale for coefficient c_k is max(|c_k|, ||A||^(n-k)), the natural
    magnitude of a sum of (n-k)-fold products.
    """
    from mmas.canonical import char_coeffs

    rng = np.random.default_rng(seed)
    worst = 0.0
    for t in range(count):
        n = sizes[t % len(sizes)]
        A = rng.normal(size=(n, n))
        b = all_coeff_bounds(MatrixInterval.point(A))
        c = char_coeffs(A)
        nrm = max(float(np.abs(A).max()), 1.0)
        scale = np.maximum(np.abs(c), nrm ** (n - np.arange(n)))
        gap = np.maximum(np.abs(b.lb - c), np.abs(b.ub - c)) / scale
        worst = max(worst, float(gap.max()))
    return {"count": count, "worst_relative": worst}


# --- weight transform -------------------------------------------------------------


def transform_trials(seed: int, count: int = 1000, min_ratio: float = 1e-3, corrupt: bool = False) -> dict:
    """Sum-to-identity and oracle-equivalence residuals over random instances."""
    rng = np.random.default_rng(seed)
    sums, oracle, structure, charpoly = [], [], [], []
    for t in range(count):
        n = (2, 3, 4)[t % 3]
        N = (2, 3, 4)[(t // 3) % 3]
        systems = [random_controllable_pair(rng, n, min_ratio) for _ in range(N)]
        models = [to_canonical(A, b) for A, b in systems]
        w = rng.dirichlet(np.ones(N))
        bundle = build_transform_bundle(models, w)
        if corrupt:
            S = list(bundle.S_list)
            S[0] = S[0] + 1e-3 * np.ones_like(S[0])
            bundle = type(bundle)(bundle.T_inv_list, bundle.T_p, bundle.T_p_inv, tuple(S), bundle.w, bundle.cond)
        A_bar, _, b_mis = reconstruct_canonical_plant(bundle, models)
        rep = verify_companion_consistency(A_bar, systems, w, b_residual=b_mis)
        sums.append(bundle.sum_to_identity_error())
        oracle.append(rep.oracle_residual)
        structure.append(rep.structure_residual)
        charpoly.append(rep.charpoly_residual)
    return {
        "count": count,
        "min_controllability_ratio": min_ratio,
        "sum_identity_max": float(np.max(sums)),
        "oracle_residual_max": float(np.max(oracle)),
        "oracle_residual_median": float(np.median(oracle)),
        "oracle_pass_fraction": float(np.mean(np.asarray(oracle) <= 1e-8)),
        "structure_residual_max": float(np.max(structure)),
        "charpoly_residual_max": float(np.max(charpoly)),
    }


# --- vehicle model set --------------------------------------------------------------


def vehicle_models(vpn: VehicleParams | None = None, sign_convention: str = "printed", row3: str = "kinematic") -> VertexModelSet:
    ps = make_uncertain_vehicle(vpn, sign_convention, row3)
    return select_vertex_models(ps, extremal_corners(scan_monotonicity(ps)))


# --- inclusion criterion scenarios ---------------------------------------------------

OBSERVABLE = (("C_af",), ("C_ar",), ("C_af", "C_ar"))


@dataclass
class ScenarioOutcome:
    index: int
    kind: str  # "in-hull" | "excursion"
    passed: bool
    detail: dict = field(default_factory=dict)


def _random_steering(rng: np.random.Generator) -> Steering:
    return Steering("sine", amplitude_deg=float(rng.uniform(1.0, 3.0)), frequency_hz=float(rng.uniform(0.3, 1.0)))


def in_hull_scenarios(models: VertexModelSet, count: int, seed: int, horizon: float = 2.0, step: float = 2e-3) -> list[Scenario]:
    rng = np.random.default_rng([seed, 1])
    out = []
    for s in range(count):
        w = rng.dirichlet(np.ones(len(models)))
        w = w / w.sum()
        out.append(Scenario(steering=_random_steering(rng), horizon=horizon, step=step, schedule=PlantSchedule(mixture=tuple(w)), seed=s))
    return out


def excursion_scenarios(count: int, seed: int, horizon: float = 2.0, step: float = 2e-3,
                        low: float = 0.10, high: float = 0.30) -> list[tuple[Scenario, dict]]:
    """Plants with yaw-observable stiffnesses pushed ``low``..``high`` beyond a box face from t0.

    The remaining parameters are drawn uniformly inside the box.
    """
    rng = np.random.default_rng([seed, 2])
    out = []
    for s in range(count):
        params = {n: Trajectory("const", value=float(rng.uniform(TABLE_LOWER[n], TABLE_UPPER[n]))) for n in UNCERTAIN}
        which = OBSERVABLE[s % len(OBSERVABLE)]
        side = "HIGH" if rng.random() < 0.5 else "LOW"
        frac = float(rng.uniform(low, high))
        for n in which:
            v = TABLE_UPPER[n] * (1 + frac) if side == "HIGH" else TABLE_LOWER[n] * (1 - frac)
            params[n] = Trajectory("const", value=v)
        sc = Scenario(steering=_random_steering(rng), horizon=horizon, step=step, schedule=PlantSchedule(params=params), seed=s)
        out.append((sc, {"parameters": list(which), "side": side, "excess": frac}))
    return out


def _clipped(sc: Scenario) -> Scenario:
    params = {}
    for n, tr in sc.schedule.params.items():
        params[n] = Trajectory("const", value=float(np.clip(tr.value, TABLE_LOWER[n], TABLE_UPPER[n])))
    return Scenario(steering=sc.steering, horizon=sc.horizon, step=sc.step, schedule=PlantSchedule(params=params), seed=sc.seed)


def yaw_separation(sc: Scenario, sign_convention: str = "printed", row3: str = "kinematic") -> float:
    """Peak yaw-rate gap between the excursion plant and its projection onto the box, relative."""
    _, x = integrate_plant(sc, sc.step, sign_convention=sign_convention, row3=row3)
    _, xc = integrate_plant(_clipped(sc), sc.step, sign_convention=sign_convention, row3=row3)
    ref = max(float(np.abs(xc[:, YAW]).max()), 1e-300)
    return float(np.abs(x[:, YAW] - xc[:, YAW]).max()) / ref


def run_inclusion_study(models: VertexModelSet, n_in: int, n_out: int, seed: int, sign_convention: str = "printed",
                        row3: str = "kinematic", horizon: float = 2.0, step: float = 2e-3) -> dict:
    forward = []
    for s, sc in enumerate(in_hull_scenarios(models, n_in, seed, horizon, step)):
        tr = simulate_scenario(sc, models, sign_convention=sign_convention, row3=row3)
        rel = tr.relative_residual()
        bad_steps = int(np.count_nonzero(tr.verdict == -1))
        ok = bad_steps == 0 and float(rel.max()) <= 1e-8
        forward.append(ScenarioOutcome(s, "in-hull", ok, {"outside_steps": bad_steps, "max_relative_residual": float(rel.max())}))
    backward = []
    for s, (sc, meta) in enumerate(excursion_scenarios(n_out, seed, horizon, step)):
        tr = simulate_scenario(sc, models, sign_convention=sign_convention, row3=row3)
        exc = ~tr.in_box
        fired = np.flatnonzero((tr.verdict == -1) & exc)
        detail = dict(meta)
        detail["first_outside_t"] = float(tr.t[fired[0]]) if fired.size else None
        detail["outside_fraction"] = float(np.mean(tr.verdict[exc] == -1)) if exc.any() else 0.0
        if not fired.size:
            detail["yaw_separation"] = yaw_separation(sc, sign_convention, row3)
        backward.append(ScenarioOutcome(s, "excursion", bool(fired.size), detail))
    n_fwd = sum(o.passed for o in forward)
    n_bwd = sum(o.passed for o in backward)
    return {
        "forward_pass": n_fwd,
        "forward_total": len(forward),
        "backward_fired": n_bwd,
        "backward_total": len(backward),
        "backward_rate": n_bwd / max(len(backward), 1),
        "forward": [o.__dict__ for o in forward],
        "backward": [o.__dict__ for o in backward],
    }


# --- weight recovery --------------------------------------------------------------------


def weight_recovery(w_star=(0.3, 0.7), pair=(0, 1), horizon: float = 3.0, step: float = 1e-3, settle: float = 1.0,
                    sign_convention: str = "printed", row3: str = "kinematic") -> dict:
    """Plant fixed at a convex combination of two vertex models; measure weight and state errors."""
    full = vehicle_models(sign_convention=sign_convention, row3=row3)
    from mmas.simulate import model_set_from_systems

    models = model_set_from_systems([full.systems[i] for i in pair])
    sc = Scenario(steering=Steering("sine", 2.0, 0.5), horizon=horizon, step=step, schedule=PlantSchedule(mixture=tuple(w_star)))
    tr = simulate_scenario(sc, models, sign_convention=sign_convention, row3=row3)
    late = tr.t >= settle
    w_err = float(np.abs(tr.weights[late] - np.asarray(w_star)).max())
    diff = tr.x_hat - tr.x_plant
    rmse = np.sqrt(np.mean(diff**2, axis=0))
    rms = np.sqrt(np.mean(tr.x_plant**2, axis=0))
    rel = np.divide(rmse, rms, out=np.zeros_like(rmse), where=rms > 0)
    return {
        "w_star": list(w_star),
        "corners": [full.corner_labels()[i] for i in pair],
        "weight_error_after_settle": w_err,
        "state_relative_rmse": rel.tolist(),
        "full_state_relative_rmse": float(np.linalg.norm(diff) / max(np.linalg.norm(tr.x_plant), 1e-300)),
    }


# --- RK4 order -----------------------------------------------------------------------------


def rk4_orders(speeds_kmh=(50.0, 100.0), step: float = 1e-2, horizon: float = 2.0, sign_convention: str = "printed") -> list[dict]:
    out = []
    for v in speeds_kmh:
        sc = Scenario(speed=v / 3.6, steering=Steering("sine", 2.0, 0.5), horizon=horizon, step=step)
        r = rk4_order_ratio(sc, sign_convention=sign_convention)
        out.append({"speed_kmh": v, **r})
    return out
