from pathlib import Path

import pytest

from laglens.dde import DdeProblem, GaussianHistory, LinearDecayFeedback, SolverConfig, integrate

DATA = Path(__file__).parent / "data"

ACCEPTANCE_LINES: list[str] = []


def pulse_problem(T=30.0, center=-25.0, t_end=1200.0, r=1.0):
    return DdeProblem(LinearDecayFeedback(r), T, GaussianHistory(20.0, center, 1.0), t_end)


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def pulse_traj():
    return integrate(pulse_problem(), SolverConfig(512))


@pytest.fixture(scope="session")
def growth_traj():
    return integrate(pulse_problem(center=-15.0, r=1.1), SolverConfig(512))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
