"""Slow, independent reference computations used to cross-check the fast paths.

Nothing here shares code with the implementations it checks: determinants and
characteristic polynomials come from cofactor expansion, extremes from corner
or grid enumeration, simplex least squares from scipy's NNLS, and hull
membership from a linear program.
"""
from __future__ import annotations

import itertools

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import linprog, nnls


def cofactor_det(A) -> float:
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if n == 1:
        return float(A[0, 0])
    if n == 2:
        return float(A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0])
    total = 0.0
    for j in range(n):
        if A[0, j] == 0.0:
            continue
        minor = np.delete(np.delete(A, 0, axis=0), j, axis=1)
        total += (-1) ** j * A[0, j] * cofactor_det(minor)
    return total


def _poly_det(M: list[list[np.ndarray]]) -> np.ndarray:
    n = len(M)
    if n == 1:
        return M[0][0]
    out = np.zeros(1)
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in M[1:]]
        term = P.polymul(M[0][j], _poly_det(minor))
        out = P.polyadd(out, term) if j % 2 == 0 else P.polysub(out, term)
    return out


def cofactor_charpoly(A) -> np.ndarray:
    """Coefficients (c_0 .. c_{n-1}) of det(sI - A) by cofactor expansion with polynomial entries."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    M = [[np.array([-A[i, j], 1.0]) if i == j else np.array([-A[i, j]]) for j in range(n)] for i in range(n)]
    p = np.zeros(n + 1)
    d = _poly_det(M)
    p[: d.size] = d
    return p[:n]


def corner_extremes(ps) -> tuple[np.ndarray, np.ndarray]:
    """Element-wise min and max of A over all 2^k corners, by direct product enumeration."""
    box = ps.box
    lo = hi = None
    for choice in itertools.product(*zip(box.lower, box.upper)):
        A = ps.eval(np.array(choice)).A
        lo = A.copy() if lo is None else np.minimum(lo, A)
        hi = A.copy() if hi is None else np.maximum(hi, A)
    return lo, hi


def grid_points(box, per_axis: int = 5) -> np.ndarray:
    axes = [np.linspace(a, b, per_axis) for a, b in zip(box.lower, box.upper)]
    return np.array(list(itertools.product(*axes)))


def simplex_lsq(E, rho: float = 1e4) -> np.ndarray:
    """Approximate argmin of ||E w|| over the simplex via NNLS on a penalized sum row."""
    E = np.atleast_2d(np.asarray(E, dtype=float))
    scale = np.linalg.norm(E)
    En = E / scale if scale > 0 else E
    N = E.shape[1]
    M = np.vstack([En, rho * np.ones((1, N))])
    rhs = np.zeros(M.shape[0])
    rhs[-1] = rho
    w, _ = nnls(M, rhs, maxiter=50 * N)
    return w / w.sum()


def hull_feasible(E, tol: float = 1e-12) -> bool:
    """Is 0 in the convex hull of the columns of E (LP feasibility)?"""
    E = np.atleast_2d(np.asarray(E, dtype=float))
    N = E.shape[1]
    scale = max(float(np.abs(E).max()), 1e-300)
    A_eq = np.vstack([E / scale, np.ones((1, N))])
    b_eq = np.zeros(A_eq.shape[0])
    b_eq[-1] = 1.0
    res = linprog(np.zeros(N), A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * N, method="highs")
    return res.status == 0


def companion_pair(c) -> tuple[np.ndarray, np.ndarray]:
    """Companion (A, e_n) from ascending coefficients, written out independently."""
    c = np.asarray(c, dtype=float)
    n = c.size
    A = np.eye(n, k=1)
    A[-1] = -c
    b = np.zeros(n)
    b[-1] = 1.0
    return A, b
