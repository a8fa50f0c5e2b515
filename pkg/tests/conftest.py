import numpy as np
import pytest

from spinxxz.checks import generic_params
from spinxxz.params import table1_params, table2_params


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)


@pytest.fixture
def generic():
    return generic_params(1, 2, 3)


@pytest.fixture(scope="session")
def t1():
    return table1_params()


@pytest.fixture(scope="session")
def t2():
    return table2_params()


def random_u(rng, n):
    re = rng.uniform(0.05, 0.6, n) * rng.choice([-1.0, 1.0], n)
    return re + 1j * rng.uniform(-1.5, 1.5, n)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
