import numpy as np
import pytest

from fsisim.fields import make_grid
from fsisim.sources import PhysParams

ACCEPTANCE_LINES = {}


@pytest.fixture
def grid():
    return make_grid(16, 8, 2.0)


@pytest.fixture
def params():
    return PhysParams(mu=1.0, mu_prime=0.5, a=1.0, gamma=1.4, rho_bar=1.0,
                      alpha=1.0, beta=1.0, delta=1.0, L=2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def record_acceptance():
    """Store a one-line verdict for the terminal summary."""

    def record(number, title, passed, detail=""):
        ACCEPTANCE_LINES[number] = f"[{'PASS' if passed else 'FAIL'}] {number:>2}. {title}: {detail}"
        print(ACCEPTANCE_LINES[number])
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
