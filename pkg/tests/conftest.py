import os
import sys

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from geometry import make_rng, preset, random_structure  # noqa: E402


@pytest.fixture
def rng():
    return make_rng(12345, 0)


@pytest.fixture(scope='session')
def flat1():
    return preset('flat_kahler', 1)


@pytest.fixture(scope='session')
def flat2():
    return preset('flat_kahler', 2)


@pytest.fixture(scope='session')
def hermitian2():
    return preset('hermitian_nonkahler', 2)


@pytest.fixture(scope='session')
def almost_kahler2():
    return preset('almost_kahler_nonintegrable', 2)


@pytest.fixture(scope='session')
def random2():
    return random_structure(3, 2)


@pytest.fixture(scope='session')
def random2_order2():
    return random_structure(3, 2, order=2)
