from __future__ import annotations

import numpy as np
import pytest

from mmas.core import Bit, Corner, element_bounds
from mmas.families import make_family
from mmas.oracles import corner_extremes
from mmas.tying import (
    Direction,
    Status,
    brute_force_min_cover,
    check_coordination,
    check_coordination_curves,
    extremal_corners,
    scan_monotonicity,
    select_vertex_models,
)


def _cover(kind):
    ps = make_family(kind)
    rep = scan_monotonicity(ps)
    tpl = extremal_corners(rep)
    return ps, rep, tpl, select_vertex_models(ps, tpl)


def test_mask_distinguishes_enum_members():
    # regression: numpy object-array comparison against a str-enum silently returned all False
    rep = scan_monotonicity(make_family("parabola"))
    assert rep.mask(Direction.NON_MONOTONE)[0, 0, 0]
    assert not rep.all_monotone
    assert rep.non_monotone() == [(0, 0, 0)]


def test_parabola_witness_has_both_directions():
    rep = scan_monotonicity(make_family("parabola"))
    w = rep.witnesses[(0, 0, 0)]
    assert w.rising[0] >= 0 and w.falling[1] <= 0


def test_constant_family_all_constant_one_model():
    ps, rep, _, vs = _cover("constant")
    assert rep.mask(Direction.CONSTANT).all()
    assert len(vs) == 1


def test_diagonal_single_corner_each_extreme():
    ps, rep, _, vs = _cover("diagonal")
    assert rep.all_monotone
    assert [c.label() for c in vs.corners] == ["LL", "HH"]


def test_rotation_needs_two():
    ps, _, tpl, vs = _cover("rotation")
    assert len(vs) == 2
    assert brute_force_min_cover(tpl, 2) == 2


def test_conflict_needs_four():
    ps, _, tpl, vs = _cover("conflict")
    assert len(vs) == 4
    assert brute_force_min_cover(tpl, 2) == 4


@pytest.mark.parametrize("kind", ["diagonal", "rotation", "conflict", "tied"])
def test_selected_set_attains_every_bound(kind):
    ps, rep, _, vs = _cover(kind)
    lo, hi = corner_extremes(ps)
    As = vs.A
    assert np.array_equal(As.min(axis=0), lo) and np.array_equal(As.max(axis=0), hi)
    assert len(vs) <= 2 ** ps.box.k


def test_greedy_is_deterministic():
    a = _cover("conflict")[3].corner_labels()
    b = _cover("conflict")[3].corner_labels()
    assert a == b


def test_vehicle_is_monotone_and_a13_depends_on_theta(vehicle_report):
    assert vehicle_report.all_monotone
    l = vehicle_report.names.index("theta_r")
    assert vehicle_report.directions[l, 0, 2] != Direction.CONSTANT


def test_vehicle_selection_matches_brute_force(vehicle_set, vehicle_report):
    tpl = extremal_corners(vehicle_report)
    assert len(vehicle_set) == brute_force_min_cover(tpl, vehicle_report.k)


def test_vehicle_selected_models_reproduce_bounds(vehicle, vehicle_report, vehicle_set):
    mi = element_bounds(vehicle, vehicle_report)
    assert np.array_equal(vehicle_set.A.min(axis=0), mi.lb)
    assert np.array_equal(vehicle_set.A.max(axis=0), mi.ub)


def test_template_matching():
    rep = scan_monotonicity(make_family("diagonal"))
    tpl = extremal_corners(rep)
    t = tpl[0, 0][0]  # entry (0,0), MIN
    assert t.matches(Corner((Bit.LOW, Bit.HIGH)))
    assert not t.matches(Corner((Bit.HIGH, Bit.LOW)))


def test_coordination_affine_pair_holds():
    ms = np.linspace(0.0, 1.0, 21)
    affine, functional, *_ = check_coordination_curves(ms, 2 * ms + 1, -3 * ms)
    assert affine.holds and functional.holds
    assert np.isclose(affine.details["alpha"], -1.5)


def test_coordination_non_functional_pair_fails():
    ms = np.linspace(-1.0, 1.0, 21)
    affine, functional, symmetry, critical, periodic = check_coordination_curves(ms, ms**2, ms)
    assert not (affine.holds or functional.holds or symmetry.holds or critical.holds)
    assert periodic.status is Status.NOT_CHECKED


def test_vehicle_coordination_caf_rows():
    ps = make_family("vehicle")
    v = check_coordination(ps, 0, (0, 0), (3, 0))
    assert v.coordinated
