import math
import os

import pytest

from fsfcpt.atom import LambdaSystem
from fsfcpt.comb import CombSpec

os.environ.setdefault("FSFCPT_THREADS", "2")

# lines recorded by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def phased_comb():
    return CombSpec((0.1, 0.1), n0=10, spacing=10.0, alpha=math.pi / 5)


@pytest.fixture
def phased_system():
    return LambdaSystem(omega21=50.0, gamma_prime=1000.0)


@pytest.fixture
def small_comb():
    # three components, n = -1, 0, 1
    return CombSpec((5.0, 5.0), n0=2, spacing=20.0, alpha=0.3, n_max=1)


@pytest.fixture
def small_system():
    return LambdaSystem(omega21=40.0, gamma_prime=50.0)


@pytest.fixture
def bichromatic():
    return CombSpec((3.0, 2.0), n0=1e4, spacing=30.0, alpha=0.4, n_min=0, n_max=1)
