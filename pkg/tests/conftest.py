import sys

import numpy as np
import pytest

from nrmselect import Dataset, LossModel
from nrmselect.datagen import random_instance


def d0():
    """p=q=2, n=2, X1 = e11, X2 = e22, y = (3, 4)."""
    X = np.zeros((2, 2, 2))
    X[0, 0, 0] = 1.0
    X[1, 1, 1] = 1.0
    return Dataset(X, [3.0, 4.0])


@pytest.fixture
def D0():
    return d0()


@pytest.fixture
def ls():
    return LossModel.least_squares()


@pytest.fixture
def huber():
    return LossModel.huber(2.5)


def loss_for(family):
    return LossModel.huber(2.5) if family == "huber" else LossModel.least_squares()


def instance(seed, p=4, q=3, n=20, rank=1, noise=0.3, family="least_squares"):
    data, _ = random_instance(seed, p, q, n, rank, noise, family)
    return data


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
