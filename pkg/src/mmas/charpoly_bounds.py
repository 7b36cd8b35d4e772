"""Interval enclosures of characteristic-polynomial coefficients.

Given element-wise bounds ``lb <= A <= ub`` the coefficients of
``det(sI - A) = s**n + sum_k c_k s**k`` are enclosed by

* ``c_{n-1} = -tr(A)`` (exact interval),
* ``c_0 = (-1)**n det(A)`` via the Leibniz expansion,
* ``c_k = (-1)**(n-k) * sum of (n-k)-principal minors`` for the rest.

Each permutation product is bounded with proper interval multiplication, so
the enclosure is sound for sign-indefinite entries.  ``literal=True`` switches
to the endpoint-product rule (product of lower bounds / product of upper
bounds), which is only valid for nonnegative entries and is kept for comparison.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from mmas.core import MatrixInterval

MAX_PERM_DIM = 8


class DimensionTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class CoefficientBounds:
    lb: np.ndarray
    ub: np.ndarray

    def __post_init__(self):
        if self.lb.shape != self.ub.shape:
            raise ValueError("lb/ub length mismatch")
        if np.any(self.lb > self.ub):
            raise ValueError(f"inverted coefficient bounds: {self.lb} > {self.ub}")

    def contains(self, c, rtol: float = 0.0) -> np.ndarray:
        """Per-coefficient containment mask with a tolerance relative to the bound magnitude."""
        c = np.asarray(c, dtype=float)
        slack = rtol * np.maximum(np.abs(self.lb), np.abs(self.ub))
        return (c >= self.lb - slack) & (c <= self.ub + slack)


@lru_cache(maxsize=None)
def _perms_with_sign(n: int) -> tuple[np.ndarray, np.ndarray]:
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp).reshape(-1, n)
    signs = np.empty(len(perms))
    for r, p in enumerate(perms):
        # parity via cycle decomposition
        seen = [False] * n
        parity = 0
        for i in range(n):
            if seen[i]:
                continue
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = p[j]
                length += 1
            parity += length - 1
        signs[r] = -1.0 if parity % 2 else 1.0
    return perms, signs


def interval_mul(alo, ahi, blo, bhi):
    """Exact interval product [a] * [b]; works element-wise on arrays."""
    p = np.stack([alo * blo, alo * bhi, ahi * blo, ahi * bhi])
    return p.min(axis=0), p.max(axis=0)


def _check_dim(n: int) -> None:
    if n > MAX_PERM_DIM:
        raise DimensionTooLarge(f"n={n} exceeds permutation budget n <= {MAX_PERM_DIM} ({MAX_PERM_DIM}! terms)")


def trace_coeff_bounds(mi: MatrixInterval) -> tuple[float, float]:
    """Bounds on c_{n-1} = -tr(A)."""
    return -float(np.sum(np.diag(mi.ub))), -float(np.sum(np.diag(mi.lb)))


def det_bounds(mi: MatrixInterval, literal: bool = False) -> tuple[float, float]:
    n = mi.n
    _check_dim(n)
    perms, signs = _perms_with_sign(n)
    rows = np.arange(n)
    lo_f = mi.lb[rows, perms]  # (n!, n) factors of each permutation product
    hi_f = mi.ub[rows, perms]
    if literal:
        plo = np.prod(lo_f, axis=1)
        phi = np.prod(hi_f, axis=1)
    else:
        plo, phi = lo_f[:, 0], hi_f[:, 0]
        for i in range(1, n):
            plo, phi = interval_mul(plo, phi, lo_f[:, i], hi_f[:, i])
    pos = signs > 0
    lo = plo[pos].sum() - phi[~pos].sum()
    hi = phi[pos].sum() - plo[~pos].sum()
    return float(lo), float(hi)


def _signed(lo: float, hi: float, sign: int) -> tuple[float, float]:
    return (lo, hi) if sign > 0 else (-hi, -lo)


def constant_term_bounds(mi: MatrixInterval, literal: bool = False) -> tuple[float, float]:
    """Bounds on c_0 = (-1)**n det(A)."""
    lo, hi = det_bounds(mi, literal=literal)
    return _signed(lo, hi, 1 if mi.n % 2 == 0 else -1)


def intermediate_coeff_bounds(mi: MatrixInterval, k: int, literal: bool = False) -> tuple[float, float]:
    """Bounds on c_k, 1 <= k <= n-2, from the (n-k)-principal minors."""
    n = mi.n
    if not 1 <= k <= n - 2:
        raise ValueError(f"intermediate index k must satisfy 1 <= k <= {n - 2}, got {k}")
    size = n - k
    _check_dim(size)
    lo_sum = hi_sum = 0.0
    for S in itertools.combinations(range(n), size):
        lo, hi = det_bounds(mi.sub(S), literal=literal)
        lo_sum += lo
        hi_sum += hi
    return _signed(lo_sum, hi_sum, 1 if size % 2 == 0 else -1)


def all_coeff_bounds(mi: MatrixInterval, literal: bool = False) -> CoefficientBounds:
    """Enclosure of (c_0, ..., c_{n-1}); the monic leading coefficient is implicit."""
    n = mi.n
    lb = np.empty(n)
    ub = np.empty(n)
    lb[0], ub[0] = constant_term_bounds(mi, literal=literal)
    for k in range(1, n - 1):
        lb[k], ub[k] = intermediate_coeff_bounds(mi, k, literal=literal)
    if n > 1:
        lb[n - 1], ub[n - 1] = trace_coeff_bounds(mi)
    if literal:
        # the endpoint rule can produce inverted pairs for sign-indefinite entries
        lb, ub = np.minimum(lb, ub), np.maximum(lb, ub)
    return CoefficientBounds(lb, ub)


def char_coeffs_batch(As: np.ndarray) -> np.ndarray:
    """Faddeev-LeVerrier on a stack of matrices, shape (m, n, n) -> (m, n)."""
    As = np.asarray(As, dtype=float)
    m, n, _ = As.shape
    c = np.zeros((m, n + 1))
    c[:, n] = 1.0
    M = np.zeros_like(As)
    eye = np.eye(n)
    for k in range(1, n + 1):
        M = As @ M + c[:, n - k + 1, None, None] * eye
        c[:, n - k] = -np.trace(As @ M, axis1=1, axis2=2) / k
    return c[:, :n]


@dataclass
class ContainmentReport:
    bounds: CoefficientBounds
    samples: int
    sample_min: np.ndarray
    sample_max: np.ndarray
    violations: np.ndarray  # per coefficient

    @property
    def slack_upper(self) -> np.ndarray:
        return self.bounds.ub - self.sample_max

    @property
    def slack_lower(self) -> np.ndarray:
        return self.sample_min - self.bounds.lb

    @property
    def total_violations(self) -> int:
        return int(self.violations.sum())

    def as_dict(self) -> dict:
        return {
            "lb": self.bounds.lb.tolist(),
            "ub": self.bounds.ub.tolist(),
            "samples": self.samples,
            "sample_min": self.sample_min.tolist(),
            "sample_max": self.sample_max.tolist(),
            "slack_lower": self.slack_lower.tolist(),
            "slack_upper": self.slack_upper.tolist(),
            "violations": self.violations.tolist(),
        }


def sampled_containment(
    mi: MatrixInterval,
    rng: np.random.Generator,
    samples: int = 10_000,
    rtol: float = 1e-12,
    bounds: CoefficientBounds | None = None,
    literal: bool = False,
) -> ContainmentReport:
    """Check the enclosure against coefficients of uniformly sampled member matrices.

    The sample always includes the two endpoint matrices ``lb`` and ``ub``.
    """
    if bounds is None:
        bounds = all_coeff_bounds(mi, literal=literal)
    As = mi.sample(rng, samples)
    As[0] = mi.lb
    if samples > 1:
        As[1] = mi.ub
    cs = char_coeffs_batch(As)
    ok = bounds.contains(cs, rtol=rtol)
    return ContainmentReport(
        bounds=bounds,
        samples=samples,
        sample_min=cs.min(axis=0),
        sample_max=cs.max(axis=0),
        violations=(~ok).sum(axis=0),
    )
