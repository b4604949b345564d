import sys
import warnings
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from moyalkit import GridSpec, HbarContext  # noqa: E402
from moyalkit.star import BoundaryDecayWarning  # noqa: E402

settings.register_profile(
    "moyalkit", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("moyalkit")


@pytest.fixture
def ctx():
    return HbarContext(1.0, 1)


@pytest.fixture
def grid():
    """Desk phase grid: N = 64, L = 16 on each axis."""
    return GridSpec.uniform(2, 64, 16.0)


@pytest.fixture
def cfg(grid):
    return grid.config()


@pytest.fixture
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryDecayWarning)
        yield


def max_err(a, b) -> float:
    a = getattr(a, "values", a)
    b = getattr(b, "values", b)
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
