from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmas.canonical import (
    Uncontrollable,
    char_coeffs,
    companion,
    controllability_matrix,
    controllability_ratio,
    to_canonical,
)
from mmas.experiments import random_controllable_pair
from mmas.oracles import cofactor_charpoly
from mmas.vehicle import VehicleParams, build_vehicle_system


def test_char_coeffs_companion_and_identity():
    assert np.allclose(char_coeffs([[0, 1], [-2, -3]]), [2, 3], atol=0)
    assert np.allclose(char_coeffs(np.eye(3)), [-1, 3, -3], atol=0)


def test_char_coeffs_vehicle_matches_cofactor_oracle():
    A = build_vehicle_system(VehicleParams()).A
    c, ref = char_coeffs(A), cofactor_charpoly(A)
    assert np.allclose(c, ref, rtol=1e-12, atol=1e-12 * np.abs(ref).max())


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_char_coeffs_random_vs_cofactor(n, seed):
    A = np.random.default_rng(seed).normal(size=(n, n))
    c, ref = char_coeffs(A), cofactor_charpoly(A)
    assert np.abs(c - ref).max() <= 1e-10 * max(np.abs(ref).max(), 1.0)


def test_controllability_matrix_examples():
    assert np.array_equal(controllability_matrix(np.zeros((2, 2)), [1.0, 0.0]), [[1, 0], [0, 0]])
    K = controllability_matrix([[0.0, 1.0], [0.0, 0.0]], [0.0, 1.0])
    assert np.array_equal(K, [[0, 1], [1, 0]])


def test_vehicle_controllability_full_rank():
    s = build_vehicle_system(VehicleParams())
    K = controllability_matrix(s.A, s.B)
    assert np.linalg.matrix_rank(K) == 4
    assert controllability_ratio(s.A, s.B) > 1e-10


def test_fixed_point_for_companion_input():
    A = companion([2.0, 3.0, 1.5])
    b = np.array([0.0, 0.0, 1.0])
    cf = to_canonical(A, b)
    assert np.abs(cf.T - np.eye(3)).max() <= 1e-9


def test_diagonal_pair_last_row():
    cf = to_canonical(np.diag([-1.0, -2.0]), [1.0, 1.0])
    assert np.allclose(cf.A_bar[-1], [-2.0, -3.0], atol=1e-12)
    assert np.allclose(cf.T @ np.diag([-1.0, -2.0]) @ cf.T_inv, cf.A_bar, atol=1e-12)


def test_decoupled_mode_uncontrollable():
    with pytest.raises(Uncontrollable) as exc:
        to_canonical(np.diag([-1.0, -2.0]), [1.0, 0.0])
    assert exc.value.ratio < 1e-10


def test_multi_input_rejected():
    with pytest.raises(ValueError):
        to_canonical(np.eye(2), np.ones((2, 2)))


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_round_trip_structure_and_theta(n, seed):
    A, b = random_controllable_pair(np.random.default_rng(seed), n)
    cf = to_canonical(A, b)
    inf = lambda M: np.abs(M).sum(axis=1).max()  # noqa: E731
    assert inf(cf.T @ A @ cf.T_inv - cf.A_bar) <= 1e-8 * inf(A)
    assert np.abs(cf.A_bar[:-1] - np.eye(n, k=1)[:-1]).max() <= 1e-9
    assert np.array_equal(cf.A_bar[-1], -cf.theta)
    assert np.array_equal(cf.b_bar, np.eye(n)[-1])
    assert np.allclose(cf.theta, char_coeffs(A))


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_similarity_invariance(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n))
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    T = Q @ np.diag(rng.uniform(0.5, 2.0, n))
    c1, c2 = char_coeffs(A), char_coeffs(T @ A @ np.linalg.inv(T))
    assert np.abs(c1 - c2).max() <= 1e-8 * max(np.abs(c1).max(), 1.0)
