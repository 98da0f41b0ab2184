import numpy as np
import pytest

from maxplus_riccati.problem import ProblemSpec, transport_problem
from maxplus_riccati.riccati import integrate_seed


def scalar_spec(a, s, c, m, require_invertible=True):
    return ProblemSpec([[a]], [[s]], [[c]], [[m]], label="scalar", require_invertible=require_invertible)


@pytest.fixture(scope="session")
def spec16():
    return transport_problem(16)


@pytest.fixture(scope="session")
def spec32():
    return transport_problem(32)


@pytest.fixture(scope="session")
def traj16(spec16):
    # checkpoints cover every delta used by the semigroup and acceptance tests
    extra = [0.4 / k for k in (1, 2, 4, 8, 16)] + [0.05, 0.1, 0.15, 0.2, 0.3]
    return integrate_seed(spec16, 0.5, checkpoints=extra)


@pytest.fixture(scope="session")
def traj32(spec32):
    extra = [0.4 / k for k in (1, 2, 4, 8, 16)]
    return integrate_seed(spec32, 0.5, checkpoints=extra)


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)


# acceptance results are collected here and printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
