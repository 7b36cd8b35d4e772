"""Controllable canonical (companion) form for single-input pairs.

Coefficient convention, used everywhere in the package: the characteristic
polynomial is ``s**n + c[n-1] s**(n-1) + ... + c[0]``, and the companion last
row stores ``-c`` in ascending-power order, so ``theta = c`` (alpha_j = c[j-1]).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mmas.core import DimensionError
from mmas.linalg import inv_refined

DEFAULT_RANK_TOL = 1e-10


class Uncontrollable(ValueError):
    def __init__(self, ratio: float, tol: float, context: str = ""):
        self.ratio = ratio
        self.tol = tol
        msg = f"pair is uncontrollable: singular-value ratio {ratio:.3e} <= tol {tol:.1e}"
        if context:
            msg = f"{context}: {msg}"
        super().__init__(msg)


def _square(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise DimensionError(f"expected a non-empty square matrix, got shape {A.shape}")
    return A


def _column(b, n: int) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    if b.ndim == 2:
        if b.shape[1] != 1:
            raise DimensionError(f"single-input only: b has {b.shape[1]} columns")
        b = b[:, 0]
    if b.shape != (n,):
        raise DimensionError(f"b must have {n} entries, got shape {b.shape}")
    return b


def char_coeffs(A) -> np.ndarray:
    """Characteristic-polynomial coefficients ``(c_0, ..., c_{n-1})`` by Faddeev-LeVerrier."""
    A = _square(A)
    n = A.shape[0]
    c = np.zeros(n + 1)
    c[n] = 1.0
    M = np.zeros_like(A)
    eye = np.eye(n)
    for k in range(1, n + 1):
        M = A @ M + c[n - k + 1] * eye
        c[n - k] = -np.trace(A @ M) / k
    return c[:n]


def companion(c) -> np.ndarray:
    """Companion matrix with shifted-identity upper rows and last row ``-c``."""
    c = np.asarray(c, dtype=float).ravel()
    n = c.size
    Ab = np.zeros((n, n))
    Ab[np.arange(n - 1), np.arange(1, n)] = 1.0
    Ab[-1, :] = -c
    return Ab


def controllability_matrix(A, b) -> np.ndarray:
    A = _square(A)
    n = A.shape[0]
    v = _column(b, n)
    C = np.empty((n, n))
    for j in range(n):
        C[:, j] = v
        v = A @ v
    return C


def controllability_ratio(A, b) -> float:
    s = np.linalg.svd(controllability_matrix(A, b), compute_uv=False)
    return float(s[-1] / s[0]) if s[0] > 0 else 0.0


@dataclass(frozen=True)
class CanonicalForm:
    T: np.ndarray
    T_inv: np.ndarray
    A_bar: np.ndarray
    b_bar: np.ndarray
    theta: np.ndarray

    @property
    def n(self) -> int:
        return self.T.shape[0]


def to_canonical(A, b, tol: float = DEFAULT_RANK_TOL) -> CanonicalForm:
    """Transform a controllable single-input pair to companion form.

    ``T_inv`` is built column-wise with ``v_n = b``, ``v_j = A v_{j+1} + c_j b``;
    ``A_bar`` and ``b_bar`` are constructed from the coefficients, so their
    structure is exact and ``T A T^-1`` matches them up to rounding.
    """
    A = _square(A)
    n = A.shape[0]
    b = _column(b, n)
    ratio = controllability_ratio(A, b)
    if not ratio > tol:
        raise Uncontrollable(ratio, tol)

    c = char_coeffs(A)
    T_inv = np.empty((n, n))
    v = b.copy()
    T_inv[:, n - 1] = v
    for j in range(n - 2, -1, -1):
        v = A @ v + c[j + 1] * b
        T_inv[:, j] = v
    T, cond = inv_refined(T_inv)
    if not np.isfinite(cond):
        raise Uncontrollable(0.0, tol, "transformation matrix is singular")

    b_bar = np.zeros(n)
    b_bar[-1] = 1.0
    return CanonicalForm(T=T, T_inv=T_inv, A_bar=companion(c), b_bar=b_bar, theta=c)
