from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmas.canonical import char_coeffs
from mmas.charpoly_bounds import (
    DimensionTooLarge,
    all_coeff_bounds,
    char_coeffs_batch,
    det_bounds,
    interval_mul,
    sampled_containment,
    trace_coeff_bounds,
)
from mmas.core import MatrixInterval
from mmas.experiments import random_interval, vehicle_interval
from mmas.oracles import cofactor_det


def test_interval_mul_sign_cases():
    assert interval_mul(-1.0, 2.0, -3.0, 4.0) == (-6.0, 8.0)
    assert interval_mul(1.0, 2.0, 3.0, 4.0) == (3.0, 8.0)


def test_det_of_unit_2x2_box():
    mi = MatrixInterval(np.zeros((2, 2)), np.ones((2, 2)))
    assert det_bounds(mi) == (-1.0, 1.0)


def test_point_interval_is_exact():
    A = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-6.0, -11.0, -6.0]])
    b = all_coeff_bounds(MatrixInterval(A, A))
    assert np.array_equal(b.lb, b.ub)
    assert np.allclose(b.lb, [6.0, 11.0, 6.0], rtol=0, atol=1e-12)


def test_trace_coefficient_bounds():
    lb = np.diag([1.0, -2.0])
    ub = np.diag([3.0, 4.0])
    assert trace_coeff_bounds(MatrixInterval(lb, ub)) == (-7.0, 1.0)


def test_dimension_guard():
    with pytest.raises(DimensionTooLarge):
        all_coeff_bounds(MatrixInterval(np.zeros((9, 9)), np.ones((9, 9))))


def test_vehicle_containment():
    rep = sampled_containment(vehicle_interval(), np.random.default_rng(0), samples=2000)
    assert rep.total_violations == 0
    assert np.all(rep.bounds.lb <= rep.bounds.ub)


def test_literal_mode_sound_for_nonnegative_entries():
    rng = np.random.default_rng(3)
    lb = rng.uniform(0.0, 1.0, (3, 3))
    mi = MatrixInterval(lb, lb + rng.uniform(0.0, 1.0, (3, 3)))
    lo, hi = det_bounds(mi, literal=True)
    assert (lo, hi) == det_bounds(mi)


def test_literal_mode_breaks_on_sign_indefinite_entries():
    rng = np.random.default_rng(3)
    mi = random_interval(rng, 3)
    assert sampled_containment(mi, rng, samples=2000, literal=True).total_violations > 0
    assert sampled_containment(mi, rng, samples=2000).total_violations == 0


def test_batch_charpoly_matches_single():
    As = np.random.default_rng(1).normal(size=(20, 4, 4))
    cs = char_coeffs_batch(As)
    for A, c in zip(As, cs):
        assert np.allclose(c, char_coeffs(A), rtol=1e-10, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_det_enclosure_on_random_members(n, seed):
    rng = np.random.default_rng(seed)
    mi = random_interval(rng, n)
    lo, hi = det_bounds(mi)
    for A in mi.sample(rng, 50):
        d = cofactor_det(A)
        tol = 1e-12 * max(1.0, abs(lo), abs(hi))
        assert lo - tol <= d <= hi + tol


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_coefficient_enclosure_on_random_members(n, seed):
    rng = np.random.default_rng(seed)
    mi = random_interval(rng, n)
    rep = sampled_containment(mi, rng, samples=200)
    assert rep.total_violations == 0
