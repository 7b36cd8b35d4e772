"""Fixed-step RK4 harness: scheduled plant, parallel identification models, weights."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from mmas.core import LinearSystem
from mmas.tying import VertexModelSet
from mmas.vehicle import (
    UNCERTAIN,
    YAW,
    VehicleParams,
    build_vehicle_system,
    table_box,
    to_internal,
)
from mmas.weights import Inclusion, inclusion_criterion, solve_weights

VERDICT_CODES = {Inclusion.INSIDE: 1, Inclusion.BOUNDARY: 0, Inclusion.OUTSIDE: -1}


class Divergence(RuntimeError):
    def __init__(self, t: float, trace: SimulationTrace | None = None):
        self.t = t
        self.trace = trace
        super().__init__(f"non-finite state at t = {t:.6g} s")


def rk4_step(f: Callable[[float, np.ndarray], np.ndarray], t: float, x: np.ndarray, h: float) -> np.ndarray:
    k1 = f(t, x)
    k2 = f(t + 0.5 * h, x + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, x + 0.5 * h * k2)
    k4 = f(t + h, x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# --- scenario description ----------------------------------------------------


@dataclass(frozen=True)
class Steering:
    kind: str = "sine"  # sine | step | swept_sine | zero
    amplitude_deg: float = 2.0
    frequency_hz: float = 0.5
    end_frequency_hz: float = 2.0  # swept_sine only
    t_start: float = 0.0  # step only

    def __post_init__(self):
        if self.kind not in ("sine", "step", "swept_sine", "zero"):
            raise ValueError(f"unknown steering profile {self.kind!r}")

    def __call__(self, t: float, horizon: float = 1.0) -> float:
        a = math.radians(self.amplitude_deg)
        if self.kind == "zero":
            return 0.0
        if self.kind == "sine":
            return a * math.sin(2 * math.pi * self.frequency_hz * t)
        if self.kind == "step":
            return a if t >= self.t_start else 0.0
        # linear chirp from frequency_hz to end_frequency_hz over the horizon
        k = (self.end_frequency_hz - self.frequency_hz) / horizon
        return a * math.sin(2 * math.pi * (self.frequency_hz * t + 0.5 * k * t * t))


@dataclass(frozen=True)
class Trajectory:
    """Time course of one uncertain parameter, in config units (deg for road angles)."""

    kind: str = "const"  # const | sine | ramp | piecewise
    value: float = 0.0
    amplitude: float = 0.0
    frequency_hz: float = 0.0
    phase: float = 0.0
    start: float = 0.0
    end: float = 0.0
    t0: float = 0.0
    t1: float = 0.0
    times: tuple[float, ...] = ()
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("const", "sine", "ramp", "piecewise"):
            raise ValueError(f"unknown trajectory kind {self.kind!r}")
        if self.kind == "piecewise" and (not self.times or len(self.times) != len(self.values)):
            raise ValueError("piecewise trajectory needs equal-length non-empty times and values")
        if self.kind == "ramp" and self.t1 < self.t0:
            raise ValueError("ramp needs t1 >= t0")

    def __call__(self, t: float) -> float:
        if self.kind == "const":
            return self.value
        if self.kind == "sine":
            return self.value + self.amplitude * math.sin(2 * math.pi * self.frequency_hz * t + self.phase)
        if self.kind == "ramp":
            if t <= self.t0:
                return self.start
            if t >= self.t1 or self.t1 == self.t0:
                return self.end
            return self.start + (self.end - self.start) * (t - self.t0) / (self.t1 - self.t0)
        idx = int(np.searchsorted(self.times, t, side="right")) - 1
        return self.values[max(idx, 0)]


@dataclass(frozen=True)
class PlantSchedule:
    """Scheduled uncertain parameters, or a fixed convex mixture of the model matrices.

    Parameters missing from ``params`` stay at the nominal vehicle value
    (zero for road angles).  When ``mixture`` is given the plant is
    ``(sum_i w_i A_i, sum_i w_i B_i)`` and ``params`` is ignored.
    """

    params: dict[str, Trajectory] = field(default_factory=dict)
    mixture: tuple[float, ...] | None = None

    def __post_init__(self):
        unknown = set(self.params) - set(UNCERTAIN)
        if unknown:
            raise ValueError(f"unknown scheduled parameters: {sorted(unknown)}")
        if self.mixture is not None:
            w = np.asarray(self.mixture, dtype=float)
            if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
                raise ValueError("mixture weights must be nonnegative and sum to 1")


@dataclass(frozen=True)
class Scenario:
    speed: float = 50.0 / 3.6
    steering: Steering = Steering()
    horizon: float = 5.0
    step: float = 1e-3
    schedule: PlantSchedule = PlantSchedule()
    seed: int = 0
    disturbance: float = 0.0  # bound on an additive plant steering disturbance (deg)
    weight_lambda: float = 1e-6
    deadband_factor: float = 1e-9

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be > 0")
        if self.horizon < 10 * self.step:
            raise ValueError("horizon must be at least 10 steps")
        if not self.speed > 0:
            raise ValueError("speed must be > 0")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.step))


# --- trace ---------------------------------------------------------------------


@dataclass
class SimulationTrace:
    t: np.ndarray
    x_plant: np.ndarray  # (T, n)
    x_models: np.ndarray  # (T, N, n)
    errors: np.ndarray  # (T, n_obs, N) observed-channel identification errors
    weights: np.ndarray  # (T, N)
    residual: np.ndarray  # (T,) ||E w||
    verdict: np.ndarray  # (T,) codes: 1 INSIDE, 0 BOUNDARY, -1 OUTSIDE
    x_hat: np.ndarray  # (T, n)
    params: np.ndarray  # (T, k) plant parameters, config units; NaN for mixtures
    in_box: np.ndarray  # (T,) bool

    def __len__(self) -> int:
        return self.t.size

    @property
    def N(self) -> int:
        return self.weights.shape[1]

    def verdict_names(self) -> list[str]:
        inv = {v: k.value for k, v in VERDICT_CODES.items()}
        return [inv[int(c)] for c in self.verdict]

    def relative_residual(self) -> np.ndarray:
        nrm = np.linalg.norm(self.errors, axis=(1, 2))
        return np.divide(self.residual, nrm, out=np.zeros_like(self.residual), where=nrm > 0)

    def truncate(self, n: int) -> SimulationTrace:
        return SimulationTrace(*(getattr(self, f)[:n] for f in self.__dataclass_fields__))


# --- plant ----------------------------------------------------------------------


class _Plant:
    def __init__(self, sc: Scenario, models: VertexModelSet, vpn: VehicleParams, sign_convention: str, row3: str):
        self.sc = sc
        self.vpn = vpn
        self.sign_convention = sign_convention
        self.row3 = row3
        self.box = table_box()
        self._cache: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}
        sched = sc.schedule
        if sched.mixture is not None:
            w = np.asarray(sched.mixture, dtype=float)
            if w.size != len(models):
                raise ValueError(f"mixture has {w.size} weights for {len(models)} models")
            self._fixed = (np.einsum("i,ijk->jk", w, models.A), w @ models.B[:, :, 0])
        else:
            self._fixed = None
        nominal = vpn.uncertain_vector()
        nominal_cfg = nominal.copy()
        nominal_cfg[4:] = np.rad2deg(nominal[4:])
        self._traj = [sched.params.get(name, Trajectory("const", value=float(nominal_cfg[i]))) for i, name in enumerate(UNCERTAIN)]
        rng = np.random.default_rng(sc.seed)
        if sc.disturbance > 0:
            self._dist = np.deg2rad(sc.disturbance) * rng.uniform(-1, 1, sc.n_steps + 1)
        else:
            self._dist = None

    def params_at(self, t: float) -> np.ndarray:
        return np.array([tr(t) for tr in self._traj])

    def matrices(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        if self._fixed is not None:
            return self._fixed
        p = tuple(self.params_at(t))
        hit = self._cache.get(p)
        if hit is None:
            sys = build_vehicle_system(self.vpn.with_uncertain(to_internal(p)), self.sign_convention, self.row3)
            hit = (sys.A, sys.B[:, 0])
            if len(self._cache) > 4096:
                self._cache.clear()
            self._cache[p] = hit
        return hit

    def disturbance(self, t: float) -> float:
        if self._dist is None:
            return 0.0
        return float(self._dist[min(int(t / self.sc.step), self._dist.size - 1)])


def _steer(sc: Scenario) -> Callable[[float], float]:
    return lambda t: sc.steering(t, sc.horizon)


def integrate_plant(sc: Scenario, step: float, models: VertexModelSet | None = None, vpn: VehicleParams | None = None,
                    sign_convention: str = "printed", row3: str = "kinematic") -> tuple[np.ndarray, np.ndarray]:
    """Plant-only RK4 run at a given step; returns (t, x)."""
    vpn = VehicleParams(u=sc.speed) if vpn is None else vpn
    if models is None and sc.schedule.mixture is not None:
        raise ValueError("mixture plants need the model set")
    plant = _Plant(sc, models, vpn, sign_convention, row3)
    steer = _steer(sc)
    n = int(round(sc.horizon / step))

    def f(t, x):
        A, b = plant.matrices(t)
        return A @ x + b * (steer(t) + plant.disturbance(t))

    ts = np.arange(n + 1) * step
    xs = np.zeros((n + 1, 4))
    for k in range(n):
        xs[k + 1] = rk4_step(f, ts[k], xs[k], step)
    return ts, xs


def rk4_order_ratio(sc: Scenario, step: float | None = None, **kw) -> dict:
    """Error ratio under step halving, measured against a quarter-step reference.

    For a fourth-order method the ratio is about 17.
    """
    h = sc.step if step is None else step
    _, x1 = integrate_plant(sc, h, **kw)
    _, x2 = integrate_plant(sc, h / 2, **kw)
    _, x4 = integrate_plant(sc, h / 4, **kw)
    e1 = float(np.max(np.abs(x1 - x4[::4])))
    e2 = float(np.max(np.abs(x2[::2] - x4[::4])))
    return {"step": h, "err_h": e1, "err_h2": e2, "ratio": e1 / e2 if e2 > 0 else float("inf")}


def simulate_scenario(
    sc: Scenario,
    models: VertexModelSet,
    vpn: VehicleParams | None = None,
    sign_convention: str = "printed",
    row3: str = "kinematic",
    observe: tuple[int, ...] = (YAW,),
) -> SimulationTrace:
    """Run plant and identification models side by side from zero initial state.

    Every step the observed-channel error matrix is formed, the sign test and
    the weight solve are run, and the weighted state estimate is recorded.
    """
    vpn = VehicleParams(u=sc.speed) if vpn is None else vpn
    plant = _Plant(sc, models, vpn, sign_convention, row3)
    steer = _steer(sc)
    Am = models.A
    Bm = models.B[:, :, 0]
    N, n = Bm.shape
    obs = list(observe)
    T = sc.n_steps + 1
    h = sc.step

    t = np.arange(T) * h
    xp_hist = np.zeros((T, n))
    xm_hist = np.zeros((T, N, n))
    err = np.zeros((T, len(obs), N))
    w_hist = np.zeros((T, N))
    res = np.zeros(T)
    verdict = np.zeros(T, dtype=int)
    xhat = np.zeros((T, n))
    params = np.full((T, len(UNCERTAIN)), np.nan)
    in_box = np.ones(T, dtype=bool)

    def fp(tt, x):
        A, b = plant.matrices(tt)
        return A @ x + b * (steer(tt) + plant.disturbance(tt))

    def fm(tt, X):
        return np.einsum("ijk,ik->ij", Am, X) + Bm * steer(tt)

    box = plant.box
    sumsq = np.zeros(len(obs))
    w = np.full(N, 1.0 / N)
    xp = np.zeros(n)
    xm = np.zeros((N, n))
    for k in range(T):
        if k > 0:
            with np.errstate(over="ignore", invalid="ignore"):
                xp = rk4_step(fp, t[k - 1], xp, h)
                xm = rk4_step(fm, t[k - 1], xm, h)
                sq = xp[obs] ** 2
            if not (np.all(np.isfinite(xp)) and np.all(np.isfinite(xm)) and np.all(np.isfinite(sq))):
                partial = SimulationTrace(t, xp_hist, xm_hist, err, w_hist, res, verdict, xhat, params, in_box)
                raise Divergence(float(t[k]), partial.truncate(k))
        if sc.schedule.mixture is None:
            p = plant.params_at(t[k])
            params[k] = p
            in_box[k] = box.contains(to_internal(p), tol=1e-12)
        E = (xm[:, obs] - xp[obs]).T
        sumsq += xp[obs] ** 2 if k == 0 else sq
        rms = np.sqrt(sumsq / (k + 1))
        v = inclusion_criterion(E, sc.deadband_factor * rms)
        sol = solve_weights(E, lam=sc.weight_lambda, w_prev=w)
        w = sol.w
        xp_hist[k] = xp
        xm_hist[k] = xm
        err[k] = E
        w_hist[k] = w
        res[k] = sol.residual
        verdict[k] = VERDICT_CODES[v.status]
        xhat[k] = w @ xm
    return SimulationTrace(t, xp_hist, xm_hist, err, w_hist, res, verdict, xhat, params, in_box)


def model_set_from_systems(systems: list[LinearSystem], rank_tol: float = 1e-10) -> VertexModelSet:
    """Wrap explicit (A, B) pairs as a model set (no corner provenance)."""
    from mmas.canonical import to_canonical

    canon = [to_canonical(s.A, s.B, tol=rank_tol) for s in systems]
    return VertexModelSet(corners=[], systems=list(systems), canonical=canon, coverage={})


# --- hull coverage ----------------------------------------------------------------


@dataclass
class CoverageReport:
    fraction: float
    samples: int
    covered: int
    tol: float
    worst_residual: float
    horizon: float
    step: float
    first_uncovered: list[list[float]]  # a few uncovered parameter vectors, config units

    def as_dict(self) -> dict:
        return {
            "fraction": self.fraction,
            "samples": self.samples,
            "covered": self.covered,
            "tol": self.tol,
            "worst_relative_residual": self.worst_residual,
            "horizon": self.horizon,
            "step": self.step,
            "first_uncovered": self.first_uncovered,
        }


def _batched_rk4(A: np.ndarray, B: np.ndarray, steer: Callable[[float], float], T: int, h: float, obs: int) -> np.ndarray:
    """Observed channel of x' = A x + B u for a stack of systems; returns (T, M)."""
    M, n, _ = A.shape
    x = np.zeros((M, n))
    out = np.zeros((T, M))

    def f(t, X):
        return np.einsum("mij,mj->mi", A, X) + B * steer(t)

    for k in range(1, T):
        x = rk4_step(f, (k - 1) * h, x, h)
        out[k] = x[:, obs]
    return out


def hull_coverage(
    models: VertexModelSet,
    samples: int = 10_000,
    seed: int = 0,
    vpn: VehicleParams | None = None,
    steering: Steering = Steering(),
    horizon: float = 2.0,
    step: float = 2e-3,
    tol: float = 1e-6,
    sign_convention: str = "printed",
    row3: str = "kinematic",
    chunk: int = 2_000,
) -> CoverageReport:
    """Fraction of uniformly sampled in-box plants whose yaw errors the model set can cancel.

    A plant counts as covered when, at every step, the smallest simplex
    residual ``min_w |sum_i w_i e_i|`` is at most ``tol`` times ``||e||``.
    """
    from mmas.vehicle import batch_vehicle_matrices, to_display
    from mmas.weights import simplex_residual_1d

    vpn = VehicleParams() if vpn is None else vpn
    box = table_box()
    rng = np.random.default_rng(seed)
    m = box.sample(rng, samples)
    T = int(round(horizon / step)) + 1
    steer = lambda t: steering(t, horizon)  # noqa: E731
    ym = _batched_rk4(models.A, models.B[:, :, 0], steer, T, step, YAW)  # (T, N)

    worst = np.zeros(samples)
    for s in range(0, samples, chunk):
        A, B = batch_vehicle_matrices(vpn, m[s : s + chunk], sign_convention, row3)
        yp = _batched_rk4(A, B, steer, T, step, YAW)  # (T, M)
        e = ym[:, None, :] - yp[:, :, None]  # (T, M, N)
        r = simplex_residual_1d(e)
        nrm = np.linalg.norm(e, axis=-1)
        rel = np.divide(r, nrm, out=np.zeros_like(r), where=nrm > 0)
        worst[s : s + chunk] = rel.max(axis=0)
    ok = worst <= tol
    bad = np.flatnonzero(~ok)[:5]
    return CoverageReport(
        fraction=float(ok.mean()),
        samples=samples,
        covered=int(ok.sum()),
        tol=tol,
        worst_residual=float(worst.max()),
        horizon=horizon,
        step=step,
        first_uncovered=to_display(m[bad]).tolist(),
    )
