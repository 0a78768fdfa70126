import numpy as np
import pytest

from ringlab.model import ModelSpec
from ringlab.orbit import ReducedSystem, chebyshev_fit, sigmoid_for_kind

N2_WEIGHTS = (9.0, 6.66)


@pytest.fixture(scope="session")
def n2_spec():
    return ModelSpec(n_modes=2, j0_sign=-1, j_weights=N2_WEIGHTS, gain=1.0,
                     threshold=0.0, sigmoid_kind="centered")


@pytest.fixture(scope="session")
def centered_fit():
    return chebyshev_fit(sigmoid_for_kind("centered"), alpha=14.0,
                         max_error=0.01)


@pytest.fixture(scope="session")
def rsys_n2(centered_fit, n2_spec):
    return ReducedSystem(centered_fit, n2_spec)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260823)
