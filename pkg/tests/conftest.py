import sys

import numpy as np
import pytest

from mimo_gara.scenario import ArrayGeometry, GroupSpec, ScenarioConfig


@pytest.fixture
def table_config():
    return ScenarioConfig()


@pytest.fixture
def small_config():
    """4x4 array, two groups of two users, 4 subcarriers."""
    return ScenarioConfig(
        geometry=ArrayGeometry(4, 4, 0.5),
        groups=(GroupSpec(60, 30, 10, 10, 2), GroupSpec(60, 210, 10, 10, 2)),
        subcarriers=4,
        paths=3,
        rf_chains_per_group=2,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("tests.test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.RESULTS:
        terminalreporter.write_line(line)
