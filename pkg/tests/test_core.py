from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmas.core import (
    Bit,
    Corner,
    DimensionError,
    LinearSystem,
    MatrixInterval,
    ParameterBox,
    ParameterizedSystem,
    element_bounds,
    eval_at_corner,
    iter_corners,
)
from mmas.families import make_family
from mmas.oracles import corner_extremes
from mmas.tying import scan_monotonicity
from mmas.vehicle import VehicleParams, batch_vehicle_matrices, table_box


def _sys(fn, lower, upper, n=1):
    box = ParameterBox([f"m{i + 1}" for i in range(len(lower))], lower, upper)
    return ParameterizedSystem(box, n, 1, lambda m: LinearSystem(fn(m), np.ones((n, 1))))


def test_box_rejects_degenerate_and_mismatched():
    with pytest.raises(ValueError):
        ParameterBox(["a"], [1.0], [1.0])
    with pytest.raises(ValueError):
        ParameterBox(["a", "b"], [0.0], [1.0])


def test_corner_vector_and_order():
    box = ParameterBox(["a", "b"], [0.0, 10.0], [1.0, 20.0])
    assert np.array_equal(Corner((Bit.HIGH, Bit.LOW)).to_vector(box), [1.0, 10.0])
    labels = [c.label() for c in iter_corners(2)]
    assert labels == ["LL", "LH", "HL", "HH"]


def test_constant_map_every_corner_identity():
    ps = _sys(lambda m: np.eye(2), [0.0], [1.0], n=2)
    for c in iter_corners(1):
        assert np.array_equal(eval_at_corner(ps, c).A, np.eye(2))


def test_diagonal_substitution():
    ps = _sys(lambda m: np.diag(m), [1.0, 2.0], [3.0, 4.0], n=2)
    A = eval_at_corner(ps, Corner((Bit.HIGH, Bit.LOW))).A
    assert np.array_equal(A, np.diag([3.0, 2.0]))


def test_corner_length_mismatch():
    ps = _sys(lambda m: np.diag(m), [1.0, 2.0], [3.0, 4.0], n=2)
    with pytest.raises(DimensionError):
        eval_at_corner(ps, Corner((Bit.LOW,)))


def test_element_bounds_sum_and_difference():
    ps = _sys(lambda m: np.array([[m[0] + m[1]]]), [0.0, 0.0], [1.0, 1.0])
    mi = element_bounds(ps, scan_monotonicity(ps))
    assert (mi.lb[0, 0], mi.ub[0, 0]) == (0.0, 2.0)
    ps = _sys(lambda m: np.array([[m[0] - m[1]]]), [0.0, 0.0], [1.0, 1.0])
    mi = element_bounds(ps, scan_monotonicity(ps))
    assert (mi.lb[0, 0], mi.ub[0, 0]) == (-1.0, 1.0)


def test_element_bounds_refuses_non_monotone():
    ps = make_family("parabola")
    with pytest.raises(ValueError, match=r"\(0,0\).*'m1'"):
        element_bounds(ps, scan_monotonicity(ps))


@pytest.mark.parametrize("kind", ["vehicle", "diagonal", "rotation", "conflict", "tied", "constant"])
def test_element_bounds_matches_corner_enumeration(kind):
    ps = make_family(kind)
    mi = element_bounds(ps, scan_monotonicity(ps))
    lo, hi = corner_extremes(ps)
    assert np.array_equal(mi.lb, lo) and np.array_equal(mi.ub, hi)


def test_element_bounds_template_path_agrees_with_enumeration(vehicle, vehicle_report):
    full = element_bounds(vehicle, vehicle_report)
    short = element_bounds(vehicle, vehicle_report, budget_bits=0)
    assert np.array_equal(full.lb, short.lb) and np.array_equal(full.ub, short.ub)


def test_vehicle_a13_max_at_low_theta_and_low_kphi(vehicle, vehicle_report):
    mi = element_bounds(vehicle, vehicle_report)
    low = table_box().lower.copy()
    lo_corner = vehicle.eval(low).A
    assert mi.ub[0, 2] == lo_corner[0, 2]


def test_sampled_entries_inside_bounds(vehicle, vehicle_report, rng):
    mi = element_bounds(vehicle, vehicle_report)
    A, _ = batch_vehicle_matrices(VehicleParams(), table_box().sample(rng, 1000))
    assert np.all(A >= mi.lb - 1e-12) and np.all(A <= mi.ub + 1e-12)


def test_eval_is_bitwise_deterministic(vehicle, rng):
    m = table_box().sample(rng, 1)[0]
    a, b = vehicle.eval(m), vehicle.eval(m)
    assert np.array_equal(a.A, b.A) and np.array_equal(a.B, b.B)


def test_membership():
    box = table_box()
    m = box.center.copy()
    assert box.contains(m)
    m[0] = 110_000.0
    assert not box.contains(m)


def test_matrix_interval_validation():
    with pytest.raises(ValueError):
        MatrixInterval([[1.0]], [[0.0]])
    with pytest.raises(DimensionError):
        MatrixInterval(np.zeros((2, 3)), np.zeros((2, 3)))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.booleans(), min_size=1, max_size=8))
def test_complement_involution(bits):
    c = Corner(tuple(Bit(int(b)) for b in bits))
    assert c.complement().complement() == c
    assert all(a != b for a, b in zip(c.bits, c.complement().bits))
