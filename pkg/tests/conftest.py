import numpy as np
import pytest

from polylab.polytope import cube, make_polytope, simplex_polytope
from polylab.spin import build_spin_rep


@pytest.fixture(scope="session")
def rep3():
    return build_spin_rep(3)


@pytest.fixture(scope="session")
def rep5():
    return build_spin_rep(5)


@pytest.fixture(scope="session")
def cube3():
    return make_polytope(cube(3), 3)


@pytest.fixture(scope="session")
def simplex3():
    return make_polytope(simplex_polytope(3), 3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
