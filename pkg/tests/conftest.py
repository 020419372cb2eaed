import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from lpplab.field import FieldSpec

settings.register_profile(
    "lpplab", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("lpplab")


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: full-scale acceptance criteria")


@pytest.fixture
def grid2x2():
    """omega(0,0)=1, omega(1,0)=3, omega(0,1)=2, omega(1,1)=4."""
    return FieldSpec.from_table(np.array([[1.0, 2.0], [3.0, 4.0]]))


@pytest.fixture
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield


_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record and print one pass/fail line for an acceptance criterion."""

    def record(key, ok, text):
        line = f"criterion {key:<4} {'PASS' if ok else 'FAIL'}  {text}"
        _CRITERIA[key] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for key in sorted(_CRITERIA, key=lambda k: (int("".join(filter(str.isdigit, k))), k)):
            terminalreporter.write_line(_CRITERIA[key])
