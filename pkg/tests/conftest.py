import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from c1vem import Discretization, generate_structured_cube

from helpers import ACCEPTANCE, voronoi_fixture

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def disc_cache():
    cache = {}

    def get(n):
        if n not in cache:
            cache[n] = Discretization.build(generate_structured_cube(n))
        return cache[n]

    return get


@pytest.fixture(scope="session")
def voronoi():
    return voronoi_fixture()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
