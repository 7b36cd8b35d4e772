"""Simplex weights from identification errors and the sign-based inclusion test."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numba
import numpy as np


class NonFinite(ValueError):
    pass


class Inclusion(str, Enum):
    INSIDE = "INSIDE"
    OUTSIDE = "OUTSIDE"
    BOUNDARY = "BOUNDARY"


@dataclass(frozen=True)
class InclusionVerdict:
    status: Inclusion
    witness: tuple[int, int, int] | None  # (channel, positive column, negative column)
    deadband: np.ndarray
    channels: tuple[str, ...]  # per channel: "mixed" | "zero" | "boundary" | "one-signed"


def _as_error_matrix(E) -> np.ndarray:
    E = np.asarray(E, dtype=float)
    if E.ndim == 1:
        E = E.reshape(1, -1)
    if E.ndim != 2:
        raise ValueError(f"error matrix must be 2-D (channels x models), got shape {E.shape}")
    return E


def inclusion_criterion(E, deadband=0.0) -> InclusionVerdict:
    """Per-channel sign test on identification errors.

    Each row of ``E`` is one observed channel, each column one model.  Values
    with magnitude at most ``deadband`` count as zero.  OUTSIDE if some channel
    is strictly one-signed; INSIDE if every channel is mixed or all-zero and at
    least one is mixed; BOUNDARY otherwise (including an all-zero matrix).
    """
    E = _as_error_matrix(E)
    eps = np.broadcast_to(np.asarray(deadband, dtype=float), (E.shape[0],)).copy()
    if np.any(eps < 0):
        raise ValueError("deadband must be >= 0")
    if not np.all(np.isfinite(E)):
        raise NonFinite("error matrix contains non-finite values")
    pos = E > eps[:, None]
    neg = E < -eps[:, None]
    zero = ~(pos | neg)

    channels = []
    witness = None
    for r in range(E.shape[0]):
        p, q, z = pos[r].any(), neg[r].any(), zero[r].any()
        if p and q:
            channels.append("mixed")
            if witness is None:
                witness = (r, int(np.argmax(E[r])), int(np.argmin(E[r])))
        elif not p and not q:
            channels.append("zero")
        elif z:
            channels.append("boundary")
        else:
            channels.append("one-signed")

    if "one-signed" in channels:
        status = Inclusion.OUTSIDE
    elif witness is not None and all(c in ("mixed", "zero") for c in channels):
        status = Inclusion.INSIDE
    else:
        status = Inclusion.BOUNDARY
        witness = None
    return InclusionVerdict(status, witness, eps, tuple(channels))


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, v.size + 1)
    rho = np.count_nonzero(u - css / ind > 0)
    theta = css[rho - 1] / rho
    w = np.maximum(v - theta, 0.0)
    # renormalize the rounding drift so the sum is 1 to the last ulp
    return w / w.sum()


@dataclass(frozen=True)
class SimplexWeights:
    w: np.ndarray
    residual: float = 0.0  # ||E w||_2 in the units of E
    iterations: int = 0

    def __post_init__(self):
        if np.any(self.w < 0) or abs(self.w.sum() - 1.0) > 1e-12:
            raise ValueError(f"not on the simplex: {self.w}")

    def __len__(self) -> int:
        return self.w.size


def _power_iteration(Q: np.ndarray, iters: int = 100) -> float:
    x = np.ones(Q.shape[0]) / np.sqrt(Q.shape[0])
    lam = 0.0
    for _ in range(iters):
        y = Q @ x
        nrm = np.linalg.norm(y)
        if nrm == 0.0:
            return 0.0
        x = y / nrm
        new = float(x @ Q @ x)
        if abs(new - lam) <= 1e-14 * max(new, 1e-300):
            lam = new
            break
        lam = new
    return lam


@numba.njit(cache=True)
def _project_simplex_jit(v):
    n = v.size
    u = np.sort(v)[::-1]
    css = 0.0
    theta = 0.0
    for i in range(n):
        css += u[i]
        t = (css - 1.0) / (i + 1)
        if u[i] - t > 0:
            theta = t
    w = np.maximum(v - theta, 0.0)
    return w / w.sum()


@numba.njit(cache=True)
def _objective(Q, wp, lam, x):
    d = x - wp
    return x @ (Q @ x) + lam * (d @ d)


@numba.njit(cache=True)
def _pgd(Q, wp, lam, w, step, max_iter, tol, relative):
    """Projected gradient on w'Qw + lam ||w - wp||^2; returns (w, objective, iterations)."""
    fk = _objective(Q, wp, lam, w)
    for it in range(1, max_iter + 1):
        grad = 2.0 * (Q @ w + lam * (w - wp))
        w_new = _project_simplex_jit(w - step * grad)
        f_new = _objective(Q, wp, lam, w_new)
        if f_new > fk:
            return w, fk, it
        dec = fk - f_new
        w = w_new
        fk = f_new
        if relative:
            limit = tol * max(fk + dec, 1e-300)
        else:
            limit = tol
        if fk <= 1e-30 or dec <= limit:
            return w, fk, it
    return w, fk, max_iter


def solve_weights(
    E,
    lam: float = 1e-6,
    w_prev=None,
    max_iter: int = 10_000,
    tol: float = 1e-12,
) -> SimplexWeights:
    """Minimize ||E w||^2 + lam ||w - w_prev||^2 over the probability simplex.

    ``E`` is normalized by its Frobenius norm first, so the result does not
    depend on the overall scale of the errors and ``lam`` is relative.  A
    first projected-gradient pass solves the regularized problem (which picks
    the solution nearest ``w_prev``).  The penalty leaves an O(lam) residual,
    which is removed by projecting onto ``{E w = 0, sum(w) = 1}`` restricted to
    the support found, or, when no exact solution exists there, by a second
    projected-gradient pass with ``lam = 0``.
    """
    E = _as_error_matrix(E)
    N = E.shape[1]
    if N < 2:
        raise ValueError("need at least two models")
    if not np.all(np.isfinite(E)):
        raise NonFinite("error matrix contains non-finite values")
    wp = np.full(N, 1.0 / N) if w_prev is None else project_simplex(np.asarray(w_prev, dtype=float))
    if wp.shape != (N,):
        raise ValueError(f"w_prev has {wp.size} entries, expected {N}")

    scale = float(np.linalg.norm(E))
    if scale == 0.0:
        return SimplexWeights(wp, 0.0, 0)
    En = E / scale
    Q = En.T @ En
    qmax = min(_power_iteration(Q) * (1 + 1e-9), float(np.trace(Q)))
    step = 1.0 / (2.0 * (qmax + lam))
    w, f_reg, it1 = _pgd(Q, wp, lam, wp.copy(), step, max_iter, tol, relative=False)
    polished = _affine_polish(En, w)
    if polished is not None:
        return SimplexWeights(polished, float(np.linalg.norm(E @ polished)), it1)
    step0 = 1.0 / (2.0 * qmax) if qmax > 0 else step
    w, _, it2 = _pgd(Q, wp, 0.0, w, step0, max_iter, tol, relative=True)
    refined, it3 = _active_set(Q, w)
    if refined @ Q @ refined < w @ Q @ w:
        w = refined
    return SimplexWeights(w, float(np.linalg.norm(E @ w)), it1 + it2 + it3)


def _active_set(Q: np.ndarray, w: np.ndarray, max_iter: int | None = None, tol: float = 1e-13) -> tuple[np.ndarray, int]:
    """Primal active-set finish for min w'Qw on the simplex, warm-started from a feasible ``w``.

    Projected gradient converges sublinearly when ``Q`` is singular; this
    reaches the exact face optimum in a handful of steps.
    """
    N = w.size
    w = w.copy()
    free = w > 0
    max_iter = 10 * N if max_iter is None else max_iter
    for it in range(1, max_iter + 1):
        S = np.flatnonzero(free)
        g = Q @ w
        K = np.zeros((S.size + 1, S.size + 1))
        K[: S.size, : S.size] = Q[np.ix_(S, S)]
        K[: S.size, -1] = 1.0
        K[-1, : S.size] = 1.0
        rhs = np.concatenate([-g[S], [0.0]])
        sol, *_ = np.linalg.lstsq(K, rhs, rcond=None)
        p = sol[:-1]
        if np.max(np.abs(p)) <= tol:
            mu = float(np.mean(g[S]))
            lam = g - mu
            lam[S] = 0.0
            j = int(np.argmin(lam))
            if lam[j] >= -tol * max(float(np.max(np.abs(g))), 1e-300):
                return w, it
            free[j] = True
            continue
        neg = p < 0
        alpha = 1.0
        if neg.any():
            ratios = -w[S][neg] / p[neg]
            alpha = min(1.0, float(ratios.min()))
        w[S] += alpha * p
        blocked = S[w[S] <= tol]
        w[blocked] = 0.0
        free[blocked] = False
        w = np.maximum(w, 0.0)
        w /= w.sum()
    return w, max_iter


def _affine_polish(En: np.ndarray, w: np.ndarray, neg_tol: float = 1e-14) -> np.ndarray | None:
    """Smallest change to ``w`` on its support that makes ``En w = 0`` and ``sum(w) = 1``.

    Returns None when that point leaves the simplex or the constraints are
    inconsistent (no exact solution on this support).
    """
    S = np.flatnonzero(w > 0)
    if S.size < 2:
        return None
    C = np.vstack([En[:, S], np.ones((1, S.size))])
    d = np.zeros(C.shape[0])
    d[-1] = 1.0
    delta, *_ = np.linalg.lstsq(C, C @ w[S] - d, rcond=None)
    wS = w[S] - delta
    if np.max(np.abs(C @ wS - d)) > 1e-12 or wS.min() < -neg_tol:
        return None
    out = np.zeros_like(w)
    out[S] = np.maximum(wS, 0.0)
    out /= out.sum()
    if np.linalg.norm(En @ out) > np.linalg.norm(En @ w):
        return None
    return out


def simplex_residual_1d(e: np.ndarray) -> np.ndarray:
    """Closed-form min over the simplex of |sum_i w_i e_i| for single-channel rows.

    ``e`` has shape (..., N); zero when the row contains both signs, otherwise
    the smallest magnitude.
    """
    e = np.asarray(e, dtype=float)
    lo = e.min(axis=-1)
    hi = e.max(axis=-1)
    return np.where((lo <= 0) & (hi >= 0), 0.0, np.minimum(np.abs(lo), np.abs(hi)))


def estimate_state(xs, w) -> np.ndarray:
    """Convex combination sum_i w_i x_i of the model states (rows of ``xs``)."""
    xs = np.asarray(xs, dtype=float)
    w = np.asarray(getattr(w, "w", w), dtype=float)
    if xs.ndim != 2:
        raise ValueError(f"model states must be stacked as (N, n), got shape {xs.shape}")
    if xs.shape[0] != w.size:
        raise ValueError(f"{xs.shape[0]} model states but {w.size} weights")
    return w @ xs
