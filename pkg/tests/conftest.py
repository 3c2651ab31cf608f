import numpy as np
import pytest

from fpsisplit.model import mms_config, unit_params
from fpsisplit.problem import Discretization
from fpsisplit.verification import isolated_problem, mms_problem


@pytest.fixture(scope="session")
def mms_disc8():
    problem, ex = mms_problem(mms_config(8, 1e-3, 1e-3))
    return Discretization(problem), ex


@pytest.fixture(scope="session")
def isolated_disc6():
    return Discretization(isolated_problem(mms_config(6, 1e-3, 1e-3)))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def params():
    return unit_params()


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance criterion and echo it."""
    def record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
