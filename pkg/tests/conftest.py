import numpy as np
import pytest

from oracles import four_center_problem, random_logistic


@pytest.fixture
def four_centers():
    return four_center_problem()


@pytest.fixture
def small_logistic():
    return random_logistic(40, 4, seed=3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
