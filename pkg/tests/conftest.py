import pytest

from klext.klpoly import KLTable
from klext.rootsys import build_root_system
from klext.weylaffine import enumerate_slice


def _table(lab, rank, cutoff, affine=True):
    rs = build_root_system(lab, rank)
    sl = enumerate_slice(rs, cutoff, affine=affine)
    table = KLTable(sl)
    table.fill()
    return table


@pytest.fixture(scope="session")
def a1_table20():
    return _table("A", 1, 20)


@pytest.fixture(scope="session")
def a2_table12():
    return _table("A", 2, 12)


@pytest.fixture(scope="session")
def b2_table10():
    return _table("B", 2, 10)


@pytest.fixture(scope="session")
def a3_finite_table():
    rs = build_root_system("A", 3)
    return _table("A", 3, rs.num_positive, affine=False)


@pytest.fixture(scope="session")
def b2_finite_table():
    rs = build_root_system("B", 2)
    return _table("B", 2, rs.num_positive, affine=False)
