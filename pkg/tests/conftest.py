import numpy as np
import pytest

from corsing import AdrProblem, CoeffField, assemble_B
from corsing.experiments import SOLUTIONS

OSC_ETA = CoeffField.sine(1.0, 0.5, 3)


@pytest.fixture(scope="session")
def problem_1d():
    return AdrProblem(1, 2, 9, 512, solution=SOLUTIONS["u1"])


@pytest.fixture(scope="session")
def problem_1d_osc():
    return AdrProblem(1, 2, 9, 512, eta=OSC_ETA, solution=SOLUTIONS["u1"])


@pytest.fixture(scope="session")
def B_1d(problem_1d):
    return assemble_B(problem_1d)


@pytest.fixture(scope="session")
def B_1d_osc(problem_1d_osc):
    return assemble_B(problem_1d_osc)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
