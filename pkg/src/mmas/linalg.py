"""Small dense linear-algebra helpers shared by the canonical and transform code."""
from __future__ import annotations

import numpy as np
import scipy.linalg as sla
from scipy.linalg.lapack import dgecon


def cond1_estimate(lu: np.ndarray, anorm: float) -> float:
    """1-norm condition estimate from an LU factorization (LAPACK dgecon)."""
    if anorm == 0.0:
        return np.inf
    rcond, info = dgecon(lu, anorm, norm="1")
    if info != 0 or rcond == 0.0:
        return np.inf
    return 1.0 / rcond


def inv_refined(A: np.ndarray) -> tuple[np.ndarray, float]:
    """Inverse via partial-pivoting LU with one step of iterative refinement.

    Returns ``(A_inv, cond1)``; cond1 is ``inf`` for an exactly singular matrix,
    in which case the returned inverse is filled with NaN.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    lu, piv = sla.lu_factor(A, check_finite=True)
    cond = cond1_estimate(lu, float(np.linalg.norm(A, 1)))
    if not np.isfinite(cond):
        return np.full((n, n), np.nan), cond
    eye = np.eye(n)
    X = sla.lu_solve((lu, piv), eye)
    R = eye - A @ X
    X = X + sla.lu_solve((lu, piv), R)
    return X, cond
