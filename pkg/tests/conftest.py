import numpy as np
import pytest

from crgreen.validation import example_quadric


@pytest.fixture(scope="session")
def ex1():
    return example_quadric("12.1")


@pytest.fixture(scope="session")
def ex2():
    return example_quadric("12.2")


@pytest.fixture(scope="session")
def ex3():
    return example_quadric("12.3")


@pytest.fixture(scope="session")
def ex5():
    return example_quadric("12.5(b=0.1)")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_unit(rng, m):
    v = rng.standard_normal(m)
    return v / np.linalg.norm(v)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: int(k.split()[0])):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
