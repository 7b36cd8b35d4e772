"""Matrix-valued weights that carry a convex combination into canonical coordinates.

With ``T_p^-1 = sum_i w_i T_i^-1`` and ``S_i = T_p T_i^-1`` the weighted
similarity matrices sum to the identity, and the plant in canonical
coordinates is rebuilt as ``sum_i w_i S_i A_bar_i S_i^-1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from mmas.canonical import CanonicalForm, to_canonical, DEFAULT_RANK_TOL
from mmas.linalg import inv_refined


class SingularMixture(ValueError):
    def __init__(self, cond: float, limit: float):
        self.cond = cond
        super().__init__(f"weighted sum of T_i^-1 is numerically singular: cond1 ~ {cond:.3e} > {limit:.1e}")


@dataclass(frozen=True)
class TransformBundle:
    T_inv_list: tuple[np.ndarray, ...]
    T_p: np.ndarray
    T_p_inv: np.ndarray
    S_list: tuple[np.ndarray, ...]
    w: np.ndarray
    cond: float

    def sum_to_identity_error(self) -> float:
        n = self.T_p.shape[0]
        total = sum(wi * S for wi, S in zip(self.w, self.S_list))
        return float(np.max(np.abs(total - np.eye(n))))

    def mixture_error(self) -> float:
        """Relative mismatch of T_p^-1 against sum_i w_i T_i^-1."""
        mix = sum(wi * Ti for wi, Ti in zip(self.w, self.T_inv_list))
        Tp_inv, _ = inv_refined(self.T_p)
        return float(np.max(np.abs(Tp_inv - mix)) / max(np.max(np.abs(mix)), 1e-300))


def build_transform_bundle(models: list[CanonicalForm], w, cond_limit: float = 1e12) -> TransformBundle:
    w = np.asarray(getattr(w, "w", w), dtype=float)
    if len(models) != w.size:
        raise ValueError(f"{len(models)} models but {w.size} weights")
    n = models[0].n
    if any(m.n != n for m in models):
        raise ValueError("all models must share the state dimension")
    T_inv_list = tuple(m.T_inv for m in models)
    mix = sum(wi * Ti for wi, Ti in zip(w, T_inv_list))
    T_p, cond = inv_refined(mix)
    if not cond <= cond_limit:
        raise SingularMixture(cond, cond_limit)
    S_list = tuple(T_p @ Ti for Ti in T_inv_list)
    return TransformBundle(T_inv_list, T_p, mix, S_list, w.copy(), cond)


def reconstruct_canonical_plant(bundle: TransformBundle, models: list[CanonicalForm]) -> tuple[np.ndarray, np.ndarray, float]:
    """Return ``(A_bar_p, b_bar_p, b_mismatch)``.

    ``S_i^-1 = T_i T_p^-1`` is formed directly rather than by inversion.
    ``b_bar_p`` is the constructed ``e_n``; ``b_mismatch`` is its max-abs
    distance to ``sum_i w_i S_i b_bar_i``.
    """
    n = bundle.T_p.shape[0]
    A_bar = np.zeros((n, n))
    b_mix = np.zeros(n)
    for wi, S, m in zip(bundle.w, bundle.S_list, models):
        S_inv = m.T @ bundle.T_p_inv
        A_bar += wi * (S @ m.A_bar @ S_inv)
        b_mix += wi * (S @ m.b_bar)
    b_bar = np.zeros(n)
    b_bar[-1] = 1.0
    return A_bar, b_bar, float(np.max(np.abs(b_mix - b_bar)))


def companion_structure_residual(A_bar: np.ndarray) -> float:
    """Max-abs deviation of rows 1..n-1 from the shifted-identity pattern."""
    n = A_bar.shape[0]
    target = np.zeros((n - 1, n))
    target[np.arange(n - 1), np.arange(1, n)] = 1.0
    return float(np.max(np.abs(A_bar[:-1] - target))) if n > 1 else 0.0


@dataclass
class ConsistencyReport:
    structure_residual: float
    oracle_residual: float  # relative, against direct canonicalization of the mixed pair
    charpoly_residual: float  # relative, last row of the oracle vs char. poly. of A_bar_p
    b_residual: float
    tol: float
    details: dict = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        return (
            self.structure_residual <= self.tol
            and self.oracle_residual <= self.tol
            and self.b_residual <= self.tol
        )

    def as_dict(self) -> dict:
        return {
            "structure_residual": self.structure_residual,
            "oracle_residual": self.oracle_residual,
            "charpoly_residual": self.charpoly_residual,
            "b_residual": self.b_residual,
            "tol": self.tol,
            "consistent": self.consistent,
        }


def verify_companion_consistency(
    A_bar_p: np.ndarray,
    systems: list[tuple[np.ndarray, np.ndarray]],
    w,
    tol: float = 1e-8,
    b_residual: float = 0.0,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> ConsistencyReport:
    """Check a reconstructed plant against direct canonicalization of ``(sum w A_i, sum w b_i)``."""
    from mmas.canonical import char_coeffs

    w = np.asarray(getattr(w, "w", w), dtype=float)
    A_mix = sum(wi * np.asarray(A, dtype=float) for wi, (A, _) in zip(w, systems))
    b_mix = sum(wi * np.asarray(b, dtype=float).reshape(-1) for wi, (_, b) in zip(w, systems))
    oracle = to_canonical(A_mix, b_mix, tol=rank_tol)
    scale = max(float(np.max(np.abs(oracle.A_bar))), 1e-300)
    oracle_res = float(np.max(np.abs(A_bar_p - oracle.A_bar))) / scale
    cp = char_coeffs(A_bar_p)
    cp_res = float(np.max(np.abs(cp - oracle.theta)) / max(float(np.max(np.abs(oracle.theta))), 1e-300))
    return ConsistencyReport(
        structure_residual=companion_structure_residual(A_bar_p),
        oracle_residual=oracle_res,
        charpoly_residual=cp_res,
        b_residual=b_residual,
        tol=tol,
    )
