import math
from fractions import Fraction

import numpy as np
import pytest

KOCH = math.sqrt(3.0) / 6.0
LAMBDA_GRID = (0.25, math.sqrt(2.0) / 6.0, KOCH, 1.0 / 3.0, 0.5, 0.75)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_rationals(rng, count, max_den=10**6):
    out = []
    for _ in range(count):
        den = int(rng.integers(1, max_den + 1))
        out.append(Fraction(int(rng.integers(0, den + 1)), den))
    return out


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
