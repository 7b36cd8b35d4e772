"""Why the weighted-transform reconstruction is not the mixed pair's companion form.

For random instances, the reconstruction sum_i w_i S_i Abar_i S_i^-1 equals
T_p A_mix T_p^-1 with T_p = (sum_i w_i T_i^-1)^-1.  That matrix is similar to
A_mix (same characteristic polynomial) but is in companion form only when
sum_i w_i T_i^-1 happens to equal the mixed pair's own transform.
"""
from __future__ import annotations

import numpy as np

from mmas.canonical import to_canonical
from mmas.experiments import random_controllable_pair
from mmas.transform import build_transform_bundle, companion_structure_residual, reconstruct_canonical_plant


def main(count: int = 20, seed: int = 0) -> None:
    rng = np.random.default_rng(seed)
    print(f"{'n':>2} {'N':>2} {'similarity':>11} {'structure':>10} {'T-mix gap':>10}")
    for t in range(count):
        n, N = (2, 3, 4)[t % 3], (2, 3, 4)[(t // 3) % 3]
        pairs = [random_controllable_pair(rng, n) for _ in range(N)]
        models = [to_canonical(A, b) for A, b in pairs]
        w = rng.dirichlet(np.ones(N))
        bundle = build_transform_bundle(models, w)
        A_bar, _, _ = reconstruct_canonical_plant(bundle, models)
        A_mix = sum(wi * A for wi, (A, _) in zip(w, pairs))
        sim = np.abs(A_bar - bundle.T_p @ A_mix @ bundle.T_p_inv).max() / np.abs(A_bar).max()
        own = to_canonical(A_mix, sum(wi * b for wi, (_, b) in zip(w, pairs)))
        gap = np.abs(own.T_inv - bundle.T_p_inv).max() / np.abs(own.T_inv).max()
        print(f"{n:2d} {N:2d} {sim:11.2e} {companion_structure_residual(A_bar):10.2e} {gap:10.2e}")


if __name__ == "__main__":
    main()
