import re

import numpy as np
import pytest

from turnpike.pipeline import prepare

settings = None
try:
    from hypothesis import HealthCheck, settings

    settings.register_profile(
        "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
    )
    settings.load_profile("default")
except ImportError:  # pragma: no cover
    pass


@pytest.fixture(scope="session")
def ex1_setup():
    return prepare("ex1")


@pytest.fixture(scope="session")
def ex2_setup():
    return prepare("ex2")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_configure(config):
    config._acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(re.search(r"criterion\s+(\d+)", l).group(1))):
            terminalreporter.write_line(line)
