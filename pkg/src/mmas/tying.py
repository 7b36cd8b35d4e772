"""Parameter-tying analysis: monotonicity scans, extremal corners, vertex-model selection.

Monotonicity of each entry a_ij in each parameter m_l is checked numerically on
sampled one-dimensional cross-sections; the monotone directions then fix the
corner at which every entry attains its min and max, and a greedy set cover
picks a small set of corners that jointly hit every extreme.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from mmas.canonical import CanonicalForm, Uncontrollable, to_canonical, DEFAULT_RANK_TOL
from mmas.core import Bit, Corner, LinearSystem, ParameterBox, ParameterizedSystem, eval_at_corner


class Direction(str, Enum):
    INCREASING = "INCREASING"
    DECREASING = "DECREASING"
    CONSTANT = "CONSTANT"
    NON_MONOTONE = "NON_MONOTONE"


class Extreme(str, Enum):
    MIN = "MIN"
    MAX = "MAX"


class NonMonotoneEntry(ValueError):
    def __init__(self, entries: list[tuple[int, int, int]], names: Sequence[str] | None = None):
        self.entries = entries
        shown = ", ".join(
            f"(l={l}{'/' + names[l] if names else ''}, i={i}, j={j})" for l, i, j in entries[:8]
        )
        more = f" and {len(entries) - 8} more" if len(entries) > 8 else ""
        super().__init__(f"non-monotone entries: {shown}{more}")


@dataclass(frozen=True)
class Witness:
    """Two consecutive grid steps along m_l with opposite signs."""

    l: int
    i: int
    j: int
    base: tuple[float, ...]
    rising: tuple[float, float]
    falling: tuple[float, float]


@dataclass
class MonotonicityReport:
    directions: np.ndarray  # object array (k, n, n) of Direction
    grid_density: int
    cross_sections: int
    seed: int
    tol: float
    slack: float
    names: tuple[str, ...] = ()
    witnesses: dict[tuple[int, int, int], Witness] = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.directions.shape[0]

    @property
    def n(self) -> int:
        return self.directions.shape[1]

    def mask(self, direction: Direction) -> np.ndarray:
        # elementwise identity; `==` on an object array against a str-enum is not reliable
        return np.array([d is direction for d in self.directions.flat], dtype=bool).reshape(self.directions.shape)

    def non_monotone(self) -> list[tuple[int, int, int]]:
        return [tuple(int(v) for v in idx) for idx in np.argwhere(self.mask(Direction.NON_MONOTONE))]

    @property
    def all_monotone(self) -> bool:
        return not self.non_monotone()

    def table(self) -> list[dict]:
        rows = []
        for i in range(self.n):
            for j in range(self.n):
                rows.append(
                    {
                        "entry": [i + 1, j + 1],
                        **{
                            (self.names[l] if self.names else str(l)): self.directions[l, i, j].value
                            for l in range(self.k)
                        },
                    }
                )
        return rows


def _cross_section_bases(box: ParameterBox, count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.vstack([box.lower, box.upper, box.sample(rng, count)])


def scan_monotonicity(
    ps: ParameterizedSystem,
    grid: int = 11,
    cross_sections: int = 8,
    tol: float = 1e-9,
    seed: int = 0,
) -> MonotonicityReport:
    """Classify every (l, i, j) by the sign pattern of consecutive differences.

    Along each parameter the entry is sampled on ``grid`` evenly spaced points,
    for the all-LOW and all-HIGH cross-sections plus ``cross_sections`` seeded
    random ones.  Steps smaller than ``tol`` times the entry's largest observed
    magnitude count as flat.
    """
    if grid < 3:
        raise ValueError("grid must be >= 3")
    if cross_sections < 1:
        raise ValueError("cross_sections must be >= 1")
    box, n, k = ps.box, ps.n, ps.box.k
    bases = _cross_section_bases(box, cross_sections, seed)
    nb = len(bases)

    # samples[l, b, g] -> A matrix
    samples = np.empty((k, nb, grid, n, n))
    axes = [np.linspace(box.lower[l], box.upper[l], grid) for l in range(k)]
    for l in range(k):
        for b, base in enumerate(bases):
            m = base.copy()
            for g, v in enumerate(axes[l]):
                m[l] = v
                samples[l, b, g] = ps.eval(m).A

    scale = np.abs(samples).max(axis=(0, 1, 2))  # (n, n)
    deadband = tol * scale
    d = np.diff(samples, axis=2)  # (k, nb, grid-1, n, n)
    up = d > deadband
    down = d < -deadband
    any_up = up.any(axis=(1, 2))
    any_down = down.any(axis=(1, 2))

    directions = np.empty((k, n, n), dtype=object)
    directions[...] = Direction.CONSTANT
    directions[any_up & ~any_down] = Direction.INCREASING
    directions[any_down & ~any_up] = Direction.DECREASING
    directions[any_up & any_down] = Direction.NON_MONOTONE

    max_up = np.where(d > 0, d, 0).max(axis=(1, 2))
    max_down = np.where(d < 0, -d, 0).max(axis=(1, 2))
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(scale > 0, np.minimum(max_up, max_down) / scale, 0.0)
    slack = float(rel.max()) if rel.size else 0.0

    witnesses = {}
    for l, i, j in np.argwhere(any_up & any_down):
        ub, ug = np.argwhere(up[l, :, :, i, j])[0]
        db, dg = np.argwhere(down[l, :, :, i, j])[0]
        base = bases[ub].copy()
        base[l] = np.nan
        witnesses[(int(l), int(i), int(j))] = Witness(
            l=int(l),
            i=int(i),
            j=int(j),
            base=tuple(float(v) for v in base),
            rising=(float(axes[l][ug]), float(axes[l][ug + 1])),
            falling=(float(axes[l][dg]), float(axes[l][dg + 1])),
        )
    return MonotonicityReport(
        directions=directions,
        grid_density=grid,
        cross_sections=cross_sections,
        seed=seed,
        tol=tol,
        slack=slack,
        names=box.names,
        witnesses=witnesses,
    )


@dataclass(frozen=True)
class Template:
    """Partial corner: ``None`` marks a DON'T-CARE slot."""

    slots: tuple[Bit | None, ...]

    def matches(self, c: Corner) -> bool:
        return all(s is None or s == b for s, b in zip(self.slots, c.bits))

    def fill(self, box: ParameterBox | None = None, default: Bit = Bit.LOW) -> Corner | np.ndarray:
        c = Corner(default if s is None else s for s in self.slots)
        return c if box is None else c.to_vector(box)

    def completions(self) -> list[Corner]:
        choices = [(s,) if s is not None else (Bit.LOW, Bit.HIGH) for s in self.slots]
        return [Corner(bits) for bits in itertools.product(*choices)]

    @property
    def free(self) -> int:
        return sum(s is None for s in self.slots)

    def label(self) -> str:
        return "".join("*" if s is None else ("H" if s else "L") for s in self.slots)


def extremal_corners(report: MonotonicityReport) -> np.ndarray:
    """(n, n) object array of ``(argmin_template, argmax_template)`` per entry."""
    bad = report.non_monotone()
    if bad:
        raise NonMonotoneEntry(bad, report.names or None)
    k, n = report.k, report.n
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            hi, lo = [], []
            for l in range(k):
                d = report.directions[l, i, j]
                if d == Direction.INCREASING:
                    hi.append(Bit.HIGH)
                    lo.append(Bit.LOW)
                elif d == Direction.DECREASING:
                    hi.append(Bit.LOW)
                    lo.append(Bit.HIGH)
                else:
                    hi.append(None)
                    lo.append(None)
            out[i, j] = (Template(tuple(lo)), Template(tuple(hi)))
    return out


@dataclass
class VertexModelSet:
    corners: list[Corner]
    systems: list[LinearSystem]
    canonical: list[CanonicalForm]
    coverage: dict[tuple[tuple[int, int], Extreme], int]
    box: ParameterBox | None = None

    def __len__(self) -> int:
        return len(self.systems)

    @property
    def A(self) -> np.ndarray:
        return np.stack([s.A for s in self.systems])

    @property
    def B(self) -> np.ndarray:
        return np.stack([s.B for s in self.systems])

    def corner_labels(self) -> list[str]:
        names = self.box.names if self.box is not None else None
        return [c.label(names) for c in self.corners]


# Above this many corners the candidate pool is built from template merges
# instead of enumerating every completion.
CANDIDATE_ENUM_BITS = 12


def _requirements(templates: np.ndarray) -> list[tuple[tuple[int, int], Extreme, Template]]:
    n = templates.shape[0]
    reqs = []
    for i in range(n):
        for j in range(n):
            tmin, tmax = templates[i, j]
            reqs.append(((i, j), Extreme.MIN, tmin))
            reqs.append(((i, j), Extreme.MAX, tmax))
    return reqs


def _merge(a: Template, b: Template) -> Template | None:
    out = []
    for x, y in zip(a.slots, b.slots):
        if x is not None and y is not None and x != y:
            return None
        out.append(x if x is not None else y)
    return Template(tuple(out))


def _candidates(reqs, k: int) -> list[Corner]:
    temps = list(dict.fromkeys(t for _, _, t in reqs))
    pool = {Corner.all_low(k), Corner.all_high(k)}
    if k <= CANDIDATE_ENUM_BITS:
        for t in temps:
            pool.update(t.completions())
    else:
        for t in temps:
            merged = t
            for other in temps:
                m = _merge(merged, other)
                if m is not None:
                    merged = m
            for base in (t, merged):
                pool.add(base.fill(default=Bit.LOW))
                pool.add(base.fill(default=Bit.HIGH))
    return sorted(pool, key=lambda c: c.bits)


def greedy_cover(templates: np.ndarray, k: int) -> tuple[list[Corner], dict]:
    """Greedy set cover of all (entry, MIN|MAX) requirements by corners.

    Ties go to the lexicographically smallest corner (LOW < HIGH, leftmost
    parameter most significant).  A final pass drops any corner whose
    requirements are all covered by the others.
    """
    reqs = _requirements(templates)
    cands = _candidates(reqs, k)
    compat = np.array([[t.matches(c) for _, _, t in reqs] for c in cands], dtype=bool)
    if not compat.any(axis=0).all():
        raise RuntimeError("candidate pool cannot cover every requirement")

    uncovered = np.ones(len(reqs), dtype=bool)
    chosen: list[int] = []
    while uncovered.any():
        gains = (compat & uncovered).sum(axis=1)
        best = int(np.argmax(gains))  # first maximum == lexicographically smallest
        chosen.append(best)
        uncovered &= ~compat[best]

    # redundancy pruning, latest picks first
    for idx in reversed(list(chosen)):
        others = [c for c in chosen if c != idx]
        if others and compat[others].any(axis=0).all():
            chosen.remove(idx)

    chosen.sort(key=lambda c: cands[c].bits)
    corners = [cands[c] for c in chosen]
    coverage = {}
    for r, (entry, ext, _) in enumerate(reqs):
        coverage[(entry, ext)] = next(s for s, c in enumerate(chosen) if compat[c, r])
    return corners, coverage


def select_vertex_models(
    ps: ParameterizedSystem,
    templates: np.ndarray,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> VertexModelSet:
    corners, coverage = greedy_cover(templates, ps.box.k)
    systems = [eval_at_corner(ps, c) for c in corners]
    canon = []
    for c, s in zip(corners, systems):
        try:
            canon.append(to_canonical(s.A, s.B, tol=rank_tol))
        except Uncontrollable as exc:
            raise Uncontrollable(exc.ratio, exc.tol, f"corner {c.label(ps.box.names)}") from exc
    return VertexModelSet(corners=corners, systems=systems, canonical=canon, coverage=coverage, box=ps.box)


def brute_force_min_cover(templates: np.ndarray, k: int) -> int:
    """Exhaustive minimum number of corners covering all requirements (small k only)."""
    reqs = _requirements(templates)
    corners = [Corner(bits) for bits in itertools.product((Bit.LOW, Bit.HIGH), repeat=k)]
    compat = np.array([[t.matches(c) for _, _, t in reqs] for c in corners], dtype=bool)
    for size in range(1, len(corners) + 1):
        for combo in itertools.combinations(range(len(corners)), size):
            if compat[list(combo)].any(axis=0).all():
                return size
    raise RuntimeError("no cover exists")


# --- coordination conditions -------------------------------------------------


class Status(str, Enum):
    HOLDS = "HOLDS"
    FAILS = "FAILS"
    NOT_CHECKED = "NOT_CHECKED"


@dataclass
class ConditionResult:
    status: Status
    residual: float = float("nan")
    details: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.status == Status.HOLDS

    def as_dict(self) -> dict:
        return {"status": self.status.value, "residual": self.residual, **self.details}


@dataclass
class CoordinationVerdict:
    l: int
    entry_a: tuple[int, int]
    entry_b: tuple[int, int]
    affine: ConditionResult
    functional: ConditionResult
    symmetry: ConditionResult
    critical_points: ConditionResult
    periodic: ConditionResult

    @property
    def coordinated(self) -> bool:
        return any(c.holds for c in (self.affine, self.functional, self.symmetry, self.critical_points))

    def as_dict(self) -> dict:
        return {
            "parameter": self.l,
            "entry_a": list(self.entry_a),
            "entry_b": list(self.entry_b),
            "affine": self.affine.as_dict(),
            "functional": self.functional.as_dict(),
            "symmetry": self.symmetry.as_dict(),
            "critical_points": self.critical_points.as_dict(),
            "periodic": self.periodic.as_dict(),
            "coordinated": self.coordinated,
        }


def _range(g: np.ndarray) -> float:
    r = float(g.max() - g.min())
    return r if r > 0 else float(max(abs(g.max()), 1.0))


def check_affine(g1: np.ndarray, g2: np.ndarray, tol: float) -> ConditionResult:
    if np.ptp(g1) == 0:
        return ConditionResult(Status.FAILS, float("inf"), {"reason": "first curve is constant"})
    X = np.column_stack([g1, np.ones_like(g1)])
    (alpha, beta), *_ = np.linalg.lstsq(X, g2, rcond=None)
    res = float(np.max(np.abs(X @ np.array([alpha, beta]) - g2)) / _range(g2))
    ok = res <= tol and abs(alpha) > tol
    return ConditionResult(Status.HOLDS if ok else Status.FAILS, res, {"alpha": float(alpha), "beta": float(beta)})


def check_functional(g1: np.ndarray, g2: np.ndarray, tol: float) -> ConditionResult:
    """Strict co-monotonicity: every pair of samples is ordered the same way (or reversed) by both curves."""
    d1 = g1[:, None] - g1[None, :]
    d2 = g2[:, None] - g2[None, :]
    s1 = np.where(np.abs(d1) <= tol * _range(g1), 0, np.sign(d1))
    s2 = np.where(np.abs(d2) <= tol * _range(g2), 0, np.sign(d2))
    if not np.any(s1):
        return ConditionResult(Status.FAILS, 1.0, {"reason": "first curve is constant"})
    best = None
    for orient in (1, -1):
        mismatch = float(np.mean(s1 != orient * s2))
        if best is None or mismatch < best[0]:
            best = (mismatch, orient)
    mismatch, orient = best
    return ConditionResult(
        Status.HOLDS if mismatch == 0 else Status.FAILS,
        mismatch,
        {"orientation": "increasing" if orient > 0 else "decreasing"},
    )


def check_symmetry(ms: np.ndarray, g1: np.ndarray, g2: np.ndarray, tol: float, min_pairs: int = 2) -> ConditionResult:
    """Best common reflection centre over grid points and grid midpoints."""
    G = len(ms)
    best = (float("inf"), None)
    for c2 in range(1, 2 * G - 2):  # centre at half-index c2 / 2
        pairs = [(a, c2 - a) for a in range(G) if a < c2 - a < G]
        if len(pairs) < min_pairs:
            continue
        lo = np.array([p[0] for p in pairs])
        hi = np.array([p[1] for p in pairs])
        r = max(
            float(np.max(np.abs(g1[lo] - g1[hi]))) / _range(g1),
            float(np.max(np.abs(g2[lo] - g2[hi]))) / _range(g2),
        )
        if r < best[0]:
            best = (r, c2)
    res, c2 = best
    if c2 is None:
        return ConditionResult(Status.FAILS, float("inf"), {"reason": "grid too small"})
    centre = 0.5 * (ms[c2 // 2] + ms[(c2 + 1) // 2])
    return ConditionResult(Status.HOLDS if res <= tol else Status.FAILS, res, {"center": float(centre)})


def _critical(g: np.ndarray, tol: float) -> list[tuple[int, int]]:
    """Interior critical points as (grid index, curvature sign) from first-difference sign changes."""
    d = np.diff(g)
    s = np.where(np.abs(d) <= tol * _range(g), 0, np.sign(d))
    out = []
    prev_idx, prev = None, 0
    for idx, v in enumerate(s):
        if v == 0:
            continue
        if prev != 0 and v != prev:
            # extremum sits between the previous nonzero step and this one
            centre = (prev_idx + 1 + idx) // 2
            out.append((centre, int(v - prev > 0)))  # 1: minimum (curvature up), 0: maximum
        prev_idx, prev = idx, v
    return out


def check_critical_points(g1: np.ndarray, g2: np.ndarray, tol: float) -> ConditionResult:
    c1 = _critical(g1, tol)
    c2 = _critical(g2, tol)
    details = {"critical_a": [c for c, _ in c1], "critical_b": [c for c, _ in c2]}
    if len(c1) != len(c2):
        return ConditionResult(Status.FAILS, float(abs(len(c1) - len(c2))), details)
    worst = 0
    for (i1, k1), (i2, k2) in zip(c1, c2):
        if k1 != k2:
            return ConditionResult(Status.FAILS, float("inf"), {**details, "reason": "extremum types differ"})
        worst = max(worst, abs(i1 - i2))
    return ConditionResult(Status.HOLDS if worst <= 1 else Status.FAILS, float(worst), details)


def check_coordination_curves(ms, g1, g2, tol: float = 1e-6) -> tuple[ConditionResult, ...]:
    ms, g1, g2 = (np.asarray(v, dtype=float) for v in (ms, g1, g2))
    return (
        check_affine(g1, g2, tol),
        check_functional(g1, g2, tol),
        check_symmetry(ms, g1, g2, tol),
        check_critical_points(g1, g2, tol),
        ConditionResult(Status.NOT_CHECKED, details={"reason": "periodic structure detection not implemented"}),
    )


def check_coordination(
    ps: ParameterizedSystem,
    l: int,
    entry_a: tuple[int, int],
    entry_b: tuple[int, int],
    grid: int = 21,
    tol: float = 1e-6,
    base=None,
) -> CoordinationVerdict:
    """Sample g_{l,a} and g_{l,b} along parameter ``l`` (others fixed at ``base``, default the box centre)."""
    if grid < 5:
        raise ValueError("grid must be >= 5")
    box = ps.box
    m = np.array(box.center if base is None else base, dtype=float)
    ms = np.linspace(box.lower[l], box.upper[l], grid)
    g1 = np.empty(grid)
    g2 = np.empty(grid)
    for g, v in enumerate(ms):
        m[l] = v
        A = ps.eval(m).A
        g1[g] = A[entry_a]
        g2[g] = A[entry_b]
    return CoordinationVerdict(l, tuple(entry_a), tuple(entry_b), *check_coordination_curves(ms, g1, g2, tol))
