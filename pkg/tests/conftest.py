import numpy as np
import pytest

from coarsegeo.groups import rank2_group, sol_group


@pytest.fixture(scope="session")
def sol():
    return sol_group()


@pytest.fixture(scope="session")
def rank2():
    return rank2_group()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
