import math

import numpy as np
import pytest

from memcomp import Grid, ResourceProfile, principal_eigen
from memcomp.experiments import analyze
from memcomp.model import preset_q1, preset_q2

PI = math.pi


@pytest.fixture(scope="session")
def grid200():
    return Grid(0.0, PI, 200)


@pytest.fixture(scope="session")
def grid1000():
    return Grid(0.0, PI, 1000)


@pytest.fixture(scope="session")
def eig_cos1_1000(grid1000):
    return principal_eigen(ResourceProfile.cos1(grid1000), grid1000)


@pytest.fixture(scope="session")
def eig_sin1_1000(grid1000):
    return principal_eigen(ResourceProfile.sin1(grid1000), grid1000)


@pytest.fixture(scope="session")
def q1_bundle(grid1000):
    return analyze(preset_q1(grid1000), n=1000)


@pytest.fixture(scope="session")
def q2_bundle(grid1000):
    return analyze(preset_q2(grid1000), n=1000)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
