import math
import sys

import numpy as np
import pytest

from tripodgate.hilbert import build_space
from tripodgate.pulses import GateConfig

PLUS = np.array([1, 1], dtype=complex) / math.sqrt(2.0)
MINUS = np.array([1, -1], dtype=complex) / math.sqrt(2.0)


@pytest.fixture(scope="session")
def space():
    return build_space(3)


@pytest.fixture(scope="session")
def config():
    return GateConfig()


def fidelity(a, b) -> float:
    return float(abs(np.vdot(a, b)) ** 2)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
