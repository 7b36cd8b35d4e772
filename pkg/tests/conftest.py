from __future__ import annotations

import numpy as np
import pytest

from mmas.experiments import vehicle_models
from mmas.tying import scan_monotonicity
from mmas.vehicle import make_uncertain_vehicle


@pytest.fixture(scope="session")
def vehicle():
    return make_uncertain_vehicle()


@pytest.fixture(scope="session")
def vehicle_report(vehicle):
    return scan_monotonicity(vehicle)


@pytest.fixture(scope="session")
def vehicle_set():
    return vehicle_models()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[num])
