"""Domain types for parameterized uncertain linear systems over a parameter box."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Callable, Iterator, Sequence

import numpy as np

# 2**20 corners; above this the monotone-direction shortcut is mandatory.
CORNER_BUDGET_BITS = 20


class DimensionError(ValueError):
    pass


class Bit(IntEnum):
    LOW = 0
    HIGH = 1


@dataclass(frozen=True)
class ParameterBox:
    names: tuple[str, ...]
    lower: np.ndarray
    upper: np.ndarray

    def __init__(self, names: Sequence[str], lower, upper):
        lower = np.asarray(lower, dtype=float).ravel()
        upper = np.asarray(upper, dtype=float).ravel()
        names = tuple(names)
        if not (len(names) == lower.size == upper.size) or lower.size < 1:
            raise DimensionError(
                f"box needs k >= 1 matching names/lower/upper, got {len(names)}/{lower.size}/{upper.size}"
            )
        bad = np.flatnonzero(~(lower < upper))
        if bad.size:
            l = int(bad[0])
            raise ValueError(f"parameter {names[l]!r}: lower {lower[l]} must be < upper {upper[l]}")
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def k(self) -> int:
        return self.lower.size

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def contains(self, m, tol: float = 0.0) -> bool:
        m = np.asarray(m, dtype=float)
        if m.shape != (self.k,):
            raise DimensionError(f"expected parameter vector of length {self.k}, got shape {m.shape}")
        return bool(np.all(m >= self.lower - tol) and np.all(m <= self.upper + tol))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.lower + rng.random((size, self.k)) * (self.upper - self.lower)

    def index(self, name: str) -> int:
        return self.names.index(name)


@dataclass(frozen=True)
class Corner:
    """A vertex of a parameter box: one LOW/HIGH choice per parameter."""

    bits: tuple[Bit, ...]

    def __init__(self, bits):
        object.__setattr__(self, "bits", tuple(Bit(int(b)) for b in bits))

    def __len__(self) -> int:
        return len(self.bits)

    def to_vector(self, box: ParameterBox) -> np.ndarray:
        if len(self.bits) != box.k:
            raise DimensionError(f"corner has {len(self.bits)} bits, box has k={box.k}")
        hi = np.array(self.bits, dtype=bool)
        return np.where(hi, box.upper, box.lower)

    def complement(self) -> Corner:
        return Corner(1 - b for b in self.bits)

    def label(self, names: Sequence[str] | None = None) -> str:
        s = "".join("H" if b else "L" for b in self.bits)
        if names is None:
            return s
        return ", ".join(f"{n}={'HIGH' if b else 'LOW'}" for n, b in zip(names, self.bits))

    @classmethod
    def all_low(cls, k: int) -> Corner:
        return cls([Bit.LOW] * k)

    @classmethod
    def all_high(cls, k: int) -> Corner:
        return cls([Bit.HIGH] * k)


def iter_corners(k: int) -> Iterator[Corner]:
    """All 2**k corners in lexicographic order (LOW < HIGH, leftmost most significant)."""
    for bits in itertools.product((Bit.LOW, Bit.HIGH), repeat=k):
        yield Corner(bits)


@dataclass(frozen=True)
class LinearSystem:
    A: np.ndarray
    B: np.ndarray

    def __init__(self, A, B):
        A = np.array(A, dtype=float)
        B = np.array(B, dtype=float)
        if B.ndim == 1:
            B = B.reshape(-1, 1)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionError(f"A must be square, got shape {A.shape}")
        if B.ndim != 2 or B.shape[0] != A.shape[0]:
            raise DimensionError(f"B must have {A.shape[0]} rows, got shape {B.shape}")
        A.flags.writeable = False
        B.flags.writeable = False
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def h(self) -> int:
        return self.B.shape[1]


@dataclass(frozen=True)
class ParameterizedSystem:
    """Closure-style map m -> (A(m), B(m)) over a parameter box."""

    box: ParameterBox
    n: int
    h: int
    fn: Callable[[np.ndarray], LinearSystem] = field(repr=False)
    name: str = "system"

    def eval(self, m) -> LinearSystem:
        m = np.asarray(m, dtype=float)
        if m.shape != (self.box.k,):
            raise DimensionError(f"expected parameter vector of length {self.box.k}, got shape {m.shape}")
        sys = self.fn(m.copy())
        if not isinstance(sys, LinearSystem):
            sys = LinearSystem(*sys)
        if sys.n != self.n or sys.h != self.h:
            raise DimensionError(f"eval returned ({sys.n}, {sys.h}), declared ({self.n}, {self.h})")
        return sys


def eval_at_corner(ps: ParameterizedSystem, c: Corner) -> LinearSystem:
    if len(c) != ps.box.k:
        raise DimensionError(f"corner has {len(c)} bits, box has k={ps.box.k}")
    return ps.eval(c.to_vector(ps.box))


@dataclass(frozen=True)
class MatrixInterval:
    lb: np.ndarray
    ub: np.ndarray

    def __init__(self, lb, ub):
        lb = np.array(lb, dtype=float)
        ub = np.array(ub, dtype=float)
        if lb.shape != ub.shape or lb.ndim != 2 or lb.shape[0] != lb.shape[1]:
            raise DimensionError(f"interval bounds must be equal square shapes, got {lb.shape}, {ub.shape}")
        if np.any(lb > ub):
            i, j = np.argwhere(lb > ub)[0]
            raise ValueError(f"lb[{i},{j}]={lb[i, j]} exceeds ub[{i},{j}]={ub[i, j]}")
        lb.flags.writeable = False
        ub.flags.writeable = False
        object.__setattr__(self, "lb", lb)
        object.__setattr__(self, "ub", ub)

    @property
    def n(self) -> int:
        return self.lb.shape[0]

    @classmethod
    def point(cls, A) -> MatrixInterval:
        return cls(A, A)

    def sub(self, idx: Sequence[int]) -> MatrixInterval:
        ix = np.ix_(idx, idx)
        return MatrixInterval(self.lb[ix], self.ub[ix])

    def contains(self, A, tol: float = 0.0) -> bool:
        A = np.asarray(A, dtype=float)
        return bool(np.all(A >= self.lb - tol) and np.all(A <= self.ub + tol))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.random((size,) + self.lb.shape)
        return self.lb + u * (self.ub - self.lb)


def element_bounds(ps: ParameterizedSystem, report, budget_bits: int = CORNER_BUDGET_BITS) -> MatrixInterval:
    """Element-wise bounds of A(m) over the box, attained at corners.

    ``report`` is a :class:`mmas.tying.MonotonicityReport`.  Every entry must be
    monotone in every parameter.  For k <= ``budget_bits`` all corners are
    enumerated; otherwise each entry is evaluated only at its two extremal
    corners implied by the monotone directions.
    """
    from mmas.tying import Direction, extremal_corners

    n, k = ps.n, ps.box.k
    if report.directions.shape != (k, n, n):
        raise DimensionError(f"report shape {report.directions.shape} does not cover (k, n, n) = {(k, n, n)}")
    bad = np.argwhere(report.mask(Direction.NON_MONOTONE))
    if bad.size:
        l, i, j = (int(v) for v in bad[0])
        raise ValueError(
            f"entry ({i},{j}) is non-monotone in parameter {ps.box.names[l]!r} (l={l}); "
            "corner extremality does not apply"
        )

    if k <= budget_bits:
        lb = np.full((n, n), np.inf)
        ub = np.full((n, n), -np.inf)
        for c in iter_corners(k):
            A = eval_at_corner(ps, c).A
            np.minimum(lb, A, out=lb)
            np.maximum(ub, A, out=ub)
        return MatrixInterval(lb, ub)

    templates = extremal_corners(report)
    lb = np.empty((n, n))
    ub = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            tmin, tmax = templates[i, j]
            lb[i, j] = ps.eval(tmin.fill(ps.box)).A[i, j]
            ub[i, j] = ps.eval(tmax.fill(ps.box)).A[i, j]
    return MatrixInterval(lb, ub)
