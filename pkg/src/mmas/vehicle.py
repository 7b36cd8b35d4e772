"""Coupled lateral-roll vehicle model with six uncertain parameters.

State ``x = [beta, r, phi, phidot]`` (sideslip, yaw rate, roll angle, roll
rate), input the front steering angle ``delta``.  Road angles are carried in
radians internally; configs and reports use degrees.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from mmas.core import LinearSystem, ParameterBox, ParameterizedSystem

STATE_NAMES = ("beta", "r", "phi", "phidot")
YAW = 1

UNCERTAIN = ("C_af", "C_ar", "k_phi", "c_phi", "phi_r", "theta_r")
ANGLE_PARAMS = ("phi_r", "theta_r")

# Uncertainty box: +-30 % on stiffnesses/damping, road bank 0-4 deg, grade 0-8 deg.
TABLE_LOWER = {"C_af": 56_280.0, "C_ar": 57_890.0, "k_phi": 25_200.0, "c_phi": 2_100.0, "phi_r": 0.0, "theta_r": 0.0}
TABLE_UPPER = {"C_af": 104_520.0, "C_ar": 107_510.0, "k_phi": 46_800.0, "c_phi": 3_900.0, "phi_r": 4.0, "theta_r": 8.0}

SIGN_CONVENTIONS = ("printed", "standard")
ROW3_VARIANTS = ("kinematic", "printed")


class NonPositiveIc(ValueError):
    pass


@dataclass(frozen=True)
class VehicleParams:
    """Vehicle parameters in SI units (angles in rad).

    ``m_s``, ``h_s`` and ``I_xs`` are not in the published parameter table;
    the defaults are representative D-class sedan values, not published data.
    """

    m: float = 1530.0
    m_s: float = 1370.0
    I_z: float = 2315.3
    I_xs: float = 500.0
    l_f: float = 1.11
    l_r: float = 1.67
    h_s: float = 0.45
    C_af: float = 80_400.0
    C_ar: float = 82_700.0
    k_phi: float = 36_000.0
    c_phi: float = 3_000.0
    phi_r: float = 0.0
    theta_r: float = 0.0
    u: float = 50.0 / 3.6
    g: float = 9.81

    def __post_init__(self):
        for name in ("m", "m_s", "I_z", "I_xs", "l_f", "l_r", "h_s", "u"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive, got {getattr(self, name)}")

    @property
    def I_c(self) -> float:
        return self.I_xs - self.m_s**2 * self.h_s**2 / self.m

    def with_uncertain(self, m_vec) -> VehicleParams:
        return replace(self, **{k: float(v) for k, v in zip(UNCERTAIN, m_vec)})

    def uncertain_vector(self) -> np.ndarray:
        return np.array([getattr(self, k) for k in UNCERTAIN])

    def as_dict(self) -> dict:
        return asdict(self)


def build_vehicle_system(vp: VehicleParams, sign_convention: str = "printed", row3: str = "kinematic") -> LinearSystem:
    """State-space (A, B) of the lateral-roll model.

    ``sign_convention="printed"`` uses the published entry formulas verbatim
    (tyre force +C*alpha, which makes A_11 and A_22 positive);
    ``"standard"`` uses the usual -C*alpha tyre law, i.e. every cornering
    stiffness enters with the opposite sign.  ``row3="kinematic"`` sets
    d(phi)/dt = phidot; ``"printed"`` keeps the published row [0, 0, 1, 0].
    """
    if sign_convention not in SIGN_CONVENTIONS:
        raise ValueError(f"sign_convention must be one of {SIGN_CONVENTIONS}")
    if row3 not in ROW3_VARIANTS:
        raise ValueError(f"row3 must be one of {ROW3_VARIANTS}")
    Ic = vp.I_c
    if not Ic > 0:
        raise NonPositiveIc(f"I_c = I_xs - m_s^2 h_s^2 / m = {Ic:.6g} must be positive")
    s = 1.0 if sign_convention == "printed" else -1.0
    Caf, Car = s * vp.C_af, s * vp.C_ar
    m, ms, hs, u, g = vp.m, vp.m_s, vp.h_s, vp.u, vp.g
    lf, lr, Iz = vp.l_f, vp.l_r, vp.I_z
    coup = 1.0 + ms**2 * hs**2 / (m * Ic)
    grav = ms * g * hs * math.cos(vp.phi_r) * math.cos(vp.theta_r)

    A = np.zeros((4, 4))
    A[0, 0] = coup * (Caf + Car) / (m * u)
    A[0, 1] = coup * (lf * Caf - lr * Car) / (m * u**2) - 1.0
    A[0, 2] = ms * hs * (grav - vp.k_phi) / (m * u * Ic)
    A[0, 3] = -ms * hs * vp.c_phi / (m * u * Ic)
    A[1, 0] = (lf * Caf - lr * Car) / Iz
    A[1, 1] = (lf**2 * Caf + lr**2 * Car) / (Iz * u)
    if row3 == "kinematic":
        A[2, 3] = 1.0
    else:
        A[2, 2] = 1.0
    A[3, 0] = ms * hs * (Caf + Car) / (m * u * Ic)
    A[3, 1] = ms * hs * (lf * Caf - lr * Car) / (m * u * Ic)
    A[3, 2] = (grav - vp.k_phi) / Ic
    A[3, 3] = -vp.c_phi / Ic

    B = np.array([-Caf / (m * u), -lf * Caf / Iz, 0.0, -ms * hs * Caf / (m * u * Ic)])
    return LinearSystem(A, B.reshape(4, 1))


def table_box() -> ParameterBox:
    """Uncertainty box in internal units (road angles converted to rad)."""
    lo = [TABLE_LOWER[k] for k in UNCERTAIN]
    hi = [TABLE_UPPER[k] for k in UNCERTAIN]
    return ParameterBox(UNCERTAIN, to_internal(lo), to_internal(hi))


def to_internal(values) -> np.ndarray:
    """Config units (deg for road angles) -> internal units (rad)."""
    v = np.array(values, dtype=float)
    for name in ANGLE_PARAMS:
        v[..., UNCERTAIN.index(name)] = np.deg2rad(v[..., UNCERTAIN.index(name)])
    return v


def to_display(values) -> np.ndarray:
    v = np.array(values, dtype=float)
    for name in ANGLE_PARAMS:
        v[..., UNCERTAIN.index(name)] = np.rad2deg(v[..., UNCERTAIN.index(name)])
    return v


def make_uncertain_vehicle(
    vpn: VehicleParams | None = None,
    sign_convention: str = "printed",
    row3: str = "kinematic",
) -> ParameterizedSystem:
    vpn = vpn or VehicleParams()
    box = table_box()

    def fn(m: np.ndarray) -> LinearSystem:
        return build_vehicle_system(vpn.with_uncertain(m), sign_convention, row3)

    return ParameterizedSystem(box=box, n=4, h=1, fn=fn, name="vehicle")


def batch_vehicle_matrices(
    vpn: VehicleParams,
    m_batch: np.ndarray,
    sign_convention: str = "printed",
    row3: str = "kinematic",
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (A, B) for many uncertain-parameter vectors, shapes (M, 4, 4) and (M, 4)."""
    m_batch = np.atleast_2d(np.asarray(m_batch, dtype=float))
    M = m_batch.shape[0]
    Ic = vpn.I_c
    if not Ic > 0:
        raise NonPositiveIc(f"I_c = {Ic:.6g} must be positive")
    s = 1.0 if sign_convention == "printed" else -1.0
    Caf, Car, kphi, cphi, phir, thetar = (m_batch[:, i] for i in range(6))
    Caf, Car = s * Caf, s * Car
    m, ms, hs, u, g = vpn.m, vpn.m_s, vpn.h_s, vpn.u, vpn.g
    lf, lr, Iz = vpn.l_f, vpn.l_r, vpn.I_z
    coup = 1.0 + ms**2 * hs**2 / (m * Ic)
    grav = ms * g * hs * np.cos(phir) * np.cos(thetar)
    A = np.zeros((M, 4, 4))
    A[:, 0, 0] = coup * (Caf + Car) / (m * u)
    A[:, 0, 1] = coup * (lf * Caf - lr * Car) / (m * u**2) - 1.0
    A[:, 0, 2] = ms * hs * (grav - kphi) / (m * u * Ic)
    A[:, 0, 3] = -ms * hs * cphi / (m * u * Ic)
    A[:, 1, 0] = (lf * Caf - lr * Car) / Iz
    A[:, 1, 1] = (lf**2 * Caf + lr**2 * Car) / (Iz * u)
    if row3 == "kinematic":
        A[:, 2, 3] = 1.0
    else:
        A[:, 2, 2] = 1.0
    A[:, 3, 0] = ms * hs * (Caf + Car) / (m * u * Ic)
    A[:, 3, 1] = ms * hs * (lf * Caf - lr * Car) / (m * u * Ic)
    A[:, 3, 2] = (grav - kphi) / Ic
    A[:, 3, 3] = -cphi / Ic
    B = np.zeros((M, 4))
    B[:, 0] = -Caf / (m * u)
    B[:, 1] = -lf * Caf / Iz
    B[:, 3] = -ms * hs * Caf / (m * u * Ic)
    return A, B
