import pytest

from geoflow.exactnum import tower
from geoflow.flow import Slope
from geoflow.presets import (
    golden_slope,
    l_shape,
    octagon_slope,
    octagon_surface,
    sqrt2m1_slope,
    unit_torus,
)
from geoflow.surfaces import build_polysquare


@pytest.fixture(scope="session")
def t_rational():
    return tower([])


@pytest.fixture(scope="session")
def t_sqrt5():
    return tower([("n", 2, 5)])


@pytest.fixture(scope="session")
def t_sqrt2():
    return tower([("r", 2, 2)])


@pytest.fixture(scope="session")
def t_oct():
    return tower([("r", 2, 2), ("c", 3, 3)])


@pytest.fixture(scope="session")
def golden(t_sqrt5):
    return (t_sqrt5.generator("n") - 1) / 2


@pytest.fixture(scope="session")
def torus(t_sqrt5):
    return unit_torus(t_sqrt5)


@pytest.fixture(scope="session")
def lshape(t_sqrt5):
    return l_shape(t_sqrt5)


@pytest.fixture(scope="session")
def lshape_sqrt2(t_sqrt2):
    return build_polysquare({(0, 0), (1, 0), (0, 1)}, tower_spec=t_sqrt2)


@pytest.fixture(scope="session")
def octagon():
    return octagon_surface()


@pytest.fixture(scope="session")
def golden_sl():
    return golden_slope()


@pytest.fixture(scope="session")
def sqrt2m1_sl():
    return sqrt2m1_slope()


@pytest.fixture(scope="session")
def octagon_sl():
    return octagon_slope()
