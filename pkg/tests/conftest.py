import numpy as np
import pytest

from ebeam.profile import Grid, build_profile
from ebeam.scattering import reflection_sweep, spectral_grid, symmetric_lambdas


@pytest.fixture(scope="session")
def small_grid():
    return Grid(-40.0, 40.0, 1024)


@pytest.fixture(scope="session")
def gauss(small_grid):
    return build_profile("gaussian", {"amp": 0.1, "width": 2.0}, small_grid)


@pytest.fixture(scope="session")
def sweep(gauss):
    """Moderate sweep reused by the delta, local-model and asymptotic tests."""
    lams = symmetric_lambdas(spectral_grid(16.0, 200, 0.04, 4.0))
    return reflection_sweep(gauss, lams)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
