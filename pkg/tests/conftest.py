import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from acceptance_log import ACCEPTANCE_LINES  # noqa: E402
from mtschwarz.geometry import build_grid  # noqa: E402

TWO_SQUARES = [(0, 1, 0, 1), (1, 2, 0, 1)]


@pytest.fixture(scope="session")
def two_square_grid():
    return build_grid(TWO_SQUARES, "1/29")


@pytest.fixture
def unit_square():
    def make(h):
        return build_grid([(0, 1, 0, 1)], h)
    return make


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
