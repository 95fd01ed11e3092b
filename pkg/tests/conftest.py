import os

import pytest
from hypothesis import HealthCheck, settings

from thinbands.cone_solver import KSequence, solve_widths
from thinbands.surface_sections import SurfaceModel

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("ci", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def doubling():
    return KSequence.doubling(2)


@pytest.fixture(scope="session")
def doubling_solution(doubling):
    return solve_widths(doubling, 24, tol=1e-12)


@pytest.fixture(scope="session")
def doubling_model(doubling_solution):
    return SurfaceModel.from_solution(doubling_solution)


@pytest.fixture(scope="session")
def tribonacci_solution():
    return solve_widths(KSequence.constant(1), 60, tol=1e-20)
