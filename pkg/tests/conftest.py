import numpy as np
import pytest

from ccmeasure import curves as cv
from ccmeasure import spaces as sp


@pytest.fixture(scope="session")
def H():
    return sp.heisenberg()


@pytest.fixture(scope="session")
def E2():
    return sp.euclidean(2)


@pytest.fixture(scope="session")
def engel_space():
    # one space per session so the canonical family is solved once
    return sp.engel()


@pytest.fixture
def vertical():
    return cv.heisenberg_vertical()


@pytest.fixture
def tilted():
    return cv.custom_coordinate_curve("heisenberg", ["t", "0", "t"], -1, 1, name="tilted")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
