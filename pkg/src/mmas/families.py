"""Named parameterized systems: the vehicle box plus small synthetic families.

The synthetic families are tiny, hand-checkable cases used by the analysis
command and the verify suites.
"""
from __future__ import annotations

import numpy as np

from mmas.core import LinearSystem, ParameterBox, ParameterizedSystem
from mmas.vehicle import VehicleParams, make_uncertain_vehicle

_E2 = np.array([[0.0], [1.0]])


def _constant(m):
    return LinearSystem(np.array([[0.0, 1.0], [-2.0, -3.0]]), _E2)


def _diagonal(m):
    return LinearSystem(np.diag(m[:2]), np.ones((2, 1)))


def _parabola(m):
    return LinearSystem(np.array([[m[0] ** 2, 1.0], [0.0, -1.0]]), _E2)


def _rotation(m):
    return LinearSystem(np.array([[m[0], m[1]], [-m[1], m[0]]]), _E2)


def _conflict(m):
    return LinearSystem(np.array([[m[0] + m[1], m[0] - m[1]], [0.0, 0.0]]), _E2)


def _tied(m):
    # every entry increasing in both parameters: one template and its complement
    return LinearSystem(np.array([[m[0] + m[1], 1.0], [m[0] * m[1], -(1.0 / (m[0] + m[1]))]]), _E2)


# name -> (map, names, lower, upper)
SYNTHETIC = {
    "constant": (_constant, ("m1",), (0.0,), (1.0,)),
    "diagonal": (_diagonal, ("m1", "m2"), (-2.0, -4.0), (-1.0, -3.0)),
    "parabola": (_parabola, ("m1",), (-1.0,), (1.0,)),
    "rotation": (_rotation, ("m1", "m2"), (-2.0, 1.0), (-1.0, 2.0)),
    "conflict": (_conflict, ("m1", "m2"), (2.0, 0.0), (3.0, 1.0)),
    "tied": (_tied, ("m1", "m2"), (1.0, 1.0), (2.0, 2.0)),
}

FAMILIES = ("vehicle",) + tuple(SYNTHETIC)


def make_family(
    kind: str,
    lower=None,
    upper=None,
    vehicle: VehicleParams | None = None,
    sign_convention: str = "printed",
    row3: str = "kinematic",
) -> ParameterizedSystem:
    if kind == "vehicle":
        if lower is not None or upper is not None:
            raise ValueError("the vehicle box is fixed; lower/upper apply to synthetic families only")
        return make_uncertain_vehicle(vehicle, sign_convention, row3)
    if kind not in SYNTHETIC:
        raise ValueError(f"unknown system kind {kind!r}; expected one of {FAMILIES}")
    fn, names, lo, hi = SYNTHETIC[kind]
    box = ParameterBox(names, lo if lower is None else lower, hi if upper is None else upper)
    return ParameterizedSystem(box=box, n=2, h=1, fn=fn, name=kind)
