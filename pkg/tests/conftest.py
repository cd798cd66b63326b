import sys
from pathlib import Path

import pytest
from hypothesis import settings

from rissim.geometry import ArrayGeometry

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

PITCH = 4.6e-3
FREQ = 26e9


@pytest.fixture
def ris20():
    return ArrayGeometry(20, 20, PITCH, FREQ)


@pytest.fixture
def small():
    return ArrayGeometry(4, 4, PITCH, FREQ)


# filled by test_acceptance.report(); echoed after the run so the lines are
# visible without -s
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
