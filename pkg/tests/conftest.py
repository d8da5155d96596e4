import math

import pytest
from hypothesis import settings

from drawdown_occupation import BrownianDrift, CramerLundbergExp

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")

SQRT2 = math.sqrt(2.0)

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def brownian():
    return BrownianDrift(1.0, SQRT2)


@pytest.fixture
def brownian_driftless():
    return BrownianDrift(0.0, SQRT2)


@pytest.fixture
def cl():
    return CramerLundbergExp(2.0, 1.0, 1.0)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
