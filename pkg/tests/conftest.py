import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def pytest_configure(config):
    np.set_printoptions(precision=10, suppress=False)
