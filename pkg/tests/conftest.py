import numpy as np
import pytest

from polynorm.corpus import polytope_corpus
from polynorm.polytope import cube, random_sphere_hull, regular_tetrahedron


@pytest.fixture(scope="session")
def tetra():
    return regular_tetrahedron()


@pytest.fixture(scope="session")
def unit_cube():
    return cube()


@pytest.fixture(scope="session")
def corpus():
    return polytope_corpus(50, seed=0)


@pytest.fixture(scope="session")
def small_corpus():
    return [random_sphere_hull(6 + i % 6, seed=(7, i)) for i in range(20)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[key])
