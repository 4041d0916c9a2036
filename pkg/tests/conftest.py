import pytest

from otwb.css_space import Oid
from otwb.simnet import podc16_schedule, run

# The golden scenario's four operations by identity.
O1 = Oid(1, 1)  # ins x at 0, client 1
O2 = Oid(1, 2)  # del at 0, client 1
O3 = Oid(2, 1)  # ins a at 0, client 2
O4 = Oid(3, 1)  # ins b at 1, client 3


@pytest.fixture(scope="session")
def podc16_cj():
    return run("cjupiter", podc16_schedule())


@pytest.fixture(scope="session")
def podc16_j():
    return run("jupiter", podc16_schedule())


@pytest.fixture(scope="session")
def podc16_dj():
    return run("djupiter", podc16_schedule())


def text_of(value):
    return "".join(v[0] for v in value)
