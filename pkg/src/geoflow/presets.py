"""Shipped towers, slopes and surfaces used by the CLI and the test suite."""

from __future__ import annotations

from .exactnum import Q, tower
from .flow import Slope
from .surfaces import build_octagon, build_polysquare, polysquare_table

GOLDEN_DIGIT_BOUND = 1  # continued fraction digits of (sqrt5-1)/2 are all 1
SQRT2M1_DIGIT_BOUND = 2  # continued fraction digits of sqrt2-1 are all 2


def tower_sqrt5():
    return tower([("n", 2, 5)])


def tower_sqrt2():
    return tower([("r", 2, 2)])


def tower_octagon():
    return tower([("r", 2, 2), ("c", 3, 3)])


def golden_slope():
    """(sqrt5 - 1)/2: all continued fraction digits equal 1."""
    t = tower_sqrt5()
    return Slope((t.generator("n") - 1) / 2)


def sqrt2m1_slope():
    """sqrt2 - 1: all continued fraction digits equal 2."""
    t = tower_sqrt2()
    return Slope(t.generator("r") - 1)


def octagon_slope():
    """cbrt3/2, a cubic irrational outside the octagon's coordinate field."""
    t = tower_octagon()
    return Slope(t.generator("c") / 2)


def unit_torus(tower_spec=None):
    return build_polysquare({(0, 0)}, tower_spec=tower_spec or tower_sqrt5())


def l_shape(tower_spec=None):
    """Three unit squares; rows and columns wrap onto themselves."""
    return build_polysquare(
        {(0, 0), (1, 0), (0, 1)}, tower_spec=tower_spec or tower_sqrt5()
    )


def l_shape_table(tower_spec=None):
    return polysquare_table({(0, 0), (1, 0), (0, 1)}, tower_spec=tower_spec or tower_sqrt5())


def octagon_surface():
    return build_octagon()


def preset_documents():
    """Name -> (document text) for every shipped net, canonical form."""
    from .netformat import serialize_net

    t5 = tower_sqrt5()
    golden = (t5.generator("n") - 1) / 2
    out = {
        "torus": serialize_net(unit_torus(), slopes={"golden": golden}),
        "lshape": serialize_net(l_shape(), slopes={"golden": golden}),
        "octagon": serialize_net(
            octagon_surface(), slopes={"alpha": octagon_slope().alpha}
        ),
    }
    return out
