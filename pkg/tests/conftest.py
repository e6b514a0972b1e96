import numpy as np
import pytest

from kgrm.fields import Grid
from kgrm.quantities import MassMode, PhysicalConfig


@pytest.fixture
def natural():
    return PhysicalConfig()


@pytest.fixture
def free_cfg():
    return PhysicalConfig(q=0.0, mass_mode=MassMode.REST)


@pytest.fixture
def grid():
    return Grid(256, 0.2)


def smooth_random_state(grid, rng, modes=6, offset=1.5):
    """Random band-limited complex field kept away from zero, plus a random time derivative."""
    k = 2 * np.pi / grid.length
    x = grid.x
    psi = np.full(grid.n, offset, dtype=complex)
    dtpsi = np.zeros(grid.n, dtype=complex)
    for j in range(1, modes + 1):
        a, b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        psi += 0.2 * (a * np.exp(1j * j * k * x) + b * np.exp(-1j * j * k * x)) / j
        c, d = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        dtpsi += 0.3 * (c * np.exp(1j * j * k * x) + d * np.exp(-1j * j * k * x)) / j
    return psi, dtpsi


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
