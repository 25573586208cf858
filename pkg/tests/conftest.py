import numpy as np
import pytest

from abcwave.coefficients import CoefficientSet, Profile
from abcwave.experiments import build_problem
from abcwave.geometry import DomainSpec

COARSE = DomainSpec("disk", 1.0, 0.0, 16, 4)


def problem(domain=COARSE, **coeffs):
    return build_problem(domain, CoefficientSet(**coeffs))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def damped():
    return problem(d=Profile.constant(1.0), kappa=Profile.constant(1.0))


@pytest.fixture(scope="session")
def damped_k0():
    return problem(d=Profile.constant(1.0))


@pytest.fixture(scope="session")
def mixed():
    return problem(sigma=Profile.angular(1.0, 0.3, 2), delta=Profile.angular(1.0, 0.5, 3),
                   kappa=Profile.constant(1.0), d=Profile.radial(0.0, 1.0))


@pytest.fixture(scope="session")
def conservative():
    return problem(kappa=Profile.constant(1.0))
