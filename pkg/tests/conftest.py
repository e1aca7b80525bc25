import numpy as np
import pytest

from weighted_ckp import make_space


@pytest.fixture
def uniform2():
    return make_space([0.5, 0.5])


@pytest.fixture
def skewed2():
    return make_space([0.75, 0.25])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
