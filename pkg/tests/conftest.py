import numpy as np
import pytest

from hybridmimo.config import ExperimentConfig
from hybridmimo.eigenbeams import svd_decompose
from hybridmimo.experiment import build_scenario

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def baseline():
    """Default (baseline) scenario: array, layout, grid and long-term channel."""
    return build_scenario(ExperimentConfig())


@pytest.fixture(scope="session")
def baseline_svd(baseline):
    return svd_decompose(baseline.longterm)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
