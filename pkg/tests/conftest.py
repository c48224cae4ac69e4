import math

import numpy as np
import pytest

from socfloquet.lattice import LatticeParams

# criterion number -> (passed, detail); filled by test_acceptance.py
CRITERIA = {}


def record(number, passed, detail):
    prev = CRITERIA.get(number)
    if prev is not None:
        passed = passed and prev[0]
        detail = prev[1] + "; " + detail
    CRITERIA[number] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        ok, detail = CRITERIA[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} | {detail}")


@pytest.fixture
def conserving():
    """sin(alpha) = 0 at the first J0 zero, resonant impurity."""
    return LatticeParams.from_ratios(2.404825557695773, 1.0)


@pytest.fixture
def flipping():
    """cos(alpha) = 0 at the first J1 zero, resonant impurity."""
    return LatticeParams.from_ratios(3.8317059702075125, 1.0, soc_angle=math.pi / 2)


def random_state(dim, rng):
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return psi / np.linalg.norm(psi)
