from __future__ import annotations

import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmas.vehicle import (
    NonPositiveIc,
    VehicleParams,
    batch_vehicle_matrices,
    build_vehicle_system,
    make_uncertain_vehicle,
    table_box,
)

TABLE_LO = [56280.0, 57890.0, 25200.0, 2100.0, 0.0, 0.0]
TABLE_HI = [104520.0, 107510.0, 46800.0, 3900.0, np.deg2rad(4.0), np.deg2rad(8.0)]


def test_box_matches_table():
    box = table_box()
    assert np.allclose(box.lower, TABLE_LO, rtol=0, atol=0)
    assert np.allclose(box.upper, TABLE_HI, rtol=1e-15, atol=0)


def test_nominal_is_box_centre_for_stiffnesses():
    vp = VehicleParams()
    box = table_box()
    for l, name in enumerate(("C_af", "C_ar", "k_phi", "c_phi")):
        assert getattr(vp, name) == pytest.approx(box.center[l], rel=1e-12)


def test_a44_closed_form():
    vp = VehicleParams()
    A = build_vehicle_system(vp).A
    assert A[3, 3] == pytest.approx(-3000.0 / (vp.I_xs - vp.m_s**2 * vp.h_s**2 / vp.m), rel=1e-15)


def test_a13_zero_angles():
    vp = VehicleParams()
    A = build_vehicle_system(vp).A
    ref = vp.m_s * vp.h_s * (vp.m_s * vp.g * vp.h_s - vp.k_phi) / (vp.m * vp.u * vp.I_c)
    assert A[0, 2] == pytest.approx(ref, rel=1e-14)


def test_speed_scaling_of_a21_a22():
    vp = VehicleParams()
    A1 = build_vehicle_system(vp).A
    A2 = build_vehicle_system(dataclasses.replace(vp, u=2 * vp.u)).A
    assert A1[1, 0] == A2[1, 0]
    assert A2[1, 1] == pytest.approx(A1[1, 1] / 2, rel=1e-15)


def test_row3_variants():
    assert np.array_equal(build_vehicle_system(VehicleParams()).A[2], [0, 0, 0, 1])
    assert np.array_equal(build_vehicle_system(VehicleParams(), row3="printed").A[2], [0, 0, 1, 0])


def test_standard_sign_flips_stiffness_terms():
    vp = VehicleParams()
    Ap = build_vehicle_system(vp).A
    As = build_vehicle_system(vp, sign_convention="standard").A
    assert Ap[0, 0] > 0 and As[0, 0] == -Ap[0, 0]
    assert Ap[1, 1] > 0 and As[1, 1] == -Ap[1, 1]
    assert Ap[3, 3] == As[3, 3]


def test_nonpositive_ic():
    with pytest.raises(NonPositiveIc):
        build_vehicle_system(VehicleParams(I_xs=10.0))


def test_invalid_params():
    with pytest.raises(ValueError):
        VehicleParams(u=0.0)


def test_corners_evaluate():
    ps = make_uncertain_vehicle()
    box = table_box()
    for m in (box.lower, box.upper):
        s = ps.eval(m)
        assert np.all(np.isfinite(s.A)) and s.A.shape == (4, 4) and s.B.shape == (4, 1)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["printed", "standard"]), st.sampled_from(["kinematic", "printed"]))
def test_batch_matches_scalar_builder(seed, sign, row3):
    vpn = VehicleParams()
    ms = table_box().sample(np.random.default_rng(seed), 5)
    A, B = batch_vehicle_matrices(vpn, ms, sign, row3)
    for k, m in enumerate(ms):
        s = build_vehicle_system(vpn.with_uncertain(m), sign, row3)
        assert np.allclose(A[k], s.A, rtol=1e-14, atol=0)
        assert np.allclose(B[k], s.B[:, 0], rtol=1e-14, atol=0)
