import numpy as np
import pytest

from curvesurgery import EuclideanSpace, TaxicabPlane, from_vertices


@pytest.fixture(scope="session")
def e2():
    return EuclideanSpace(2)


@pytest.fixture(scope="session")
def taxi():
    return TaxicabPlane()


@pytest.fixture(scope="session")
def square(e2):
    return from_vertices(e2, [(0, 0), (1, 0), (1, 1), (0, 1)], closed=True)


@pytest.fixture(scope="session")
def segment(e2):
    return from_vertices(e2, [(0, 0), (1, 0)], closed=False)


def pytest_addoption(parser):
    parser.addoption("--runtimes", action="store_true",
                     help="print acceptance criterion runtimes")
