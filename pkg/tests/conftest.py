import math

import pytest

from chargequench import get_state


@pytest.fixture(scope="session")
def neel():
    return get_state("neel")


@pytest.fixture(scope="session")
def dimer():
    return get_state("dimer")


@pytest.fixture(scope="session")
def tilted_max():
    return get_state(f"tilted:{math.pi / 2}")
