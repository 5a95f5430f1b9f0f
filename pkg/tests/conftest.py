import pytest
from hypothesis import HealthCheck, settings

from cavitytherm import SumPolicy, solve_cutoffs, validate_geometry

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def cutoffs():
    return solve_cutoffs()


@pytest.fixture(scope="session")
def policy():
    return SumPolicy()


@pytest.fixture(scope="session")
def cube():
    return validate_geometry(1.0, 1.0, 1.0)


@pytest.fixture(scope="session")
def pizza_box():
    return validate_geometry(1.0, 100.0, 100.0)


@pytest.fixture(scope="session")
def waveguide():
    return validate_geometry(1.0, 0.1, 0.1)
