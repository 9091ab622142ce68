import numpy as np
import pytest

from contam import LogPareto, NIGParams, RegressionData, ScaledBetaTails

LINE_X = np.array([[1.0, 2.0 - 1.0 / k] for k in range(3, 8)])


def line_data():
    return RegressionData(np.array([1.0, 2.0, 3.0, 4.0, 0.0]), LINE_X, (4,), [0.0], [1.0])


LINE_CASES = {
    ("light", 0.1): (ScaledBetaTails(3.0), 0.1),
    ("light", 2): (ScaledBetaTails(3.0), 2.0),
    ("heavy", 0.1): (LogPareto(1.5), 0.1),
    ("heavy", 2): (LogPareto(1.5), 2.0),
}


def line_prior(A):
    return NIGParams.prior(A, 1.0, 1.0, 2)


@pytest.fixture
def line5():
    return line_data()


@pytest.fixture
def toy2():
    """n=2, p=1 contamination problem small enough for 2-D quadrature."""
    data = RegressionData(np.array([1.3, 0.0]), np.array([[1.0], [0.8]]), (1,), [0.5], [1.0])
    return data, NIGParams.prior(3.0, 2.0, 1.5, 1), 0.2, ScaledBetaTails(3.0)


# acceptance bookkeeping: one PASS/FAIL line per criterion, echoed after the run
ACCEPTANCE = pytest.StashKey[list]()
SESSION_START = pytest.StashKey[float]()


def pytest_sessionstart(session):
    import time

    session.config.stash[SESSION_START] = time.perf_counter()
    session.config.stash[ACCEPTANCE] = []


def pytest_collection_modifyitems(config, items):
    # the runtime criterion measures the whole session, so acceptance goes last
    items.sort(key=lambda item: item.path.name == "test_acceptance.py")


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
