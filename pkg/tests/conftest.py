import numpy as np
import pytest

from pseudoegg.domain import EggParams

ACCEPTANCE_LINES = []

M_VALUES = (0.1, 0.25, 0.4)
N_VALUES = (2, 3)
P_VALUES = (0.1, 0.3, 0.5, 0.7, 0.9)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=[(n, m) for m in M_VALUES for n in N_VALUES],
                ids=lambda nm: f"n{nm[0]}-m{nm[1]}")
def params(request):
    return EggParams(*request.param)
