import pytest

from weqlab.action import translation_action
from weqlab.group import enumerate_group, sanov_generators
from weqlab.steplab import ProductPair


@pytest.fixture(scope="session")
def sanov():
    return sanov_generators()


@pytest.fixture(scope="session")
def groups():
    return {n: enumerate_group(2, n) for n in (2, 3, 5, 6, 7, 9)}


@pytest.fixture(scope="session")
def g2(groups):
    return groups[2]


@pytest.fixture(scope="session")
def g3(groups):
    return groups[3]


@pytest.fixture(scope="session")
def g5(groups):
    return groups[5]


@pytest.fixture(scope="session")
def g9(groups):
    return groups[9]


@pytest.fixture(scope="session")
def a3(g3, sanov):
    return translation_action(g3, sanov)


@pytest.fixture(scope="session")
def a5(g5, sanov):
    return translation_action(g5, sanov)


@pytest.fixture(scope="session")
def pair33(g3, sanov):
    return ProductPair(g3, g3, sanov)


@pytest.fixture(scope="session")
def pair39(g3, g9, sanov):
    return ProductPair(g3, g9, sanov)


@pytest.fixture(scope="session")
def pair55(g5, sanov):
    return ProductPair(g5, g5, sanov)
