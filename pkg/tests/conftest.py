import math
import os
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"


def bisect(h, lo, hi):
    """Plain bisection for a sign change of h on [lo, hi], down to adjacent doubles."""
    flo = h(lo)
    assert flo * h(hi) < 0
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if (h(mid) < 0) == (flo < 0):
            lo, flo = mid, h(mid)
        else:
            hi = mid
    return 0.5 * (lo + hi)


@pytest.fixture(scope="session")
def z_star():
    """Real fixed point of 2z - 3 + e^z, i.e. the root of e^x + x - 3."""
    return bisect(lambda x: math.exp(x) + x - 3.0, 0.0, 1.0)


@pytest.fixture(scope="session")
def configs_dir():
    return CONFIGS


def many_threads():
    return max(4, os.cpu_count() or 1)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
