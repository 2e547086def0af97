"""Surface model: builders, validation, vertex classes, unfolding."""

import pytest

from geoflow.exactnum import Q, expr_text, tower
from geoflow.surfaces import (
    EdgeRef,
    Face,
    Side,
    Surface,
    SurfaceError,
    build_octagon,
    build_polysquare,
    four_copy,
    polysquare_table,
    validate,
    wrap_glue,
)


def test_torus(torus):
    assert torus.genus() == 1
    classes = torus.vertex_classes()
    assert len(classes) == 1 and classes[0].angle_halfpis == 4
    assert not classes[0].singular
    rep = validate(torus)
    assert rep.ok and rep.genus == 1


def test_lshape(lshape):
    rep = validate(lshape)
    assert rep.ok
    assert rep.genus == 2
    angles = sorted(v.angle_halfpis for v in lshape.vertex_classes())
    assert angles == [12]  # a single cone point of angle 6*pi
    assert len(lshape.faces) == 3


def test_lshape_euler_book_keeping(lshape):
    # V - E + F = 2 - 2g with E = 2F for full quadrilateral gluing
    v = len(lshape.vertex_classes())
    e = len(lshape.v_pairs) + len(lshape.h_pairs)
    f = len(lshape.faces)
    assert v - e + f == 2 - 2 * lshape.genus()


def test_octagon_structure(octagon):
    rep = validate(octagon)
    assert rep.ok
    assert rep.genus == 2
    lengths = sorted(expr_text(octagon.edge_length(i)) for i in range(7))
    assert lengths == ["1", "1", "1", "1", "r", "r", "r"]
    assert expr_text(octagon.total_vertical_length()) == "4 + 3*r"
    streets = [[octagon.faces[i].id for i in s] for s in octagon.streets()]
    assert streets == [[1, 2, 3, 4], [5, 6, 7]]
    angles = sorted(v.angle_halfpis for v in octagon.vertex_classes())
    assert angles == [4, 4, 4, 4, 12]
    # widths follow the travel rule: edges 1,3,5,7 cross width 1, 2,4,6 width sqrt2
    one = octagon.tower.one
    rt2 = octagon.tower.generator("r")
    widths = [octagon.faces[i].width for i in range(7)]
    assert [w == one for w in widths] == [True, False, True, False, True, False, True]
    assert all(w == rt2 for w in widths if not w == one)


def test_octagon_column_structure(octagon):
    stack, cum = octagon.column(4)  # face 5, the first wide-street face
    assert [octagon.faces[i].id for i in stack] == [5, 1, 7, 3]
    assert expr_text(cum[-1]) == "2 + 2*r"


def test_diagonal_cells_rejected():
    with pytest.raises(SurfaceError):
        build_polysquare({(0, 0), (1, 1)})


def test_explicit_glue_must_cover_boundary():
    cells = {(0, 0), (1, 0)}
    v, h = wrap_glue(cells)
    build_polysquare(cells, v, h)  # complete: fine
    with pytest.raises(SurfaceError):
        build_polysquare(cells, v[:0], h)  # vertical boundary left unglued


def test_interior_edges_not_gluable():
    cells = {(0, 0), (1, 0)}
    v, h = wrap_glue(cells)
    with pytest.raises(SurfaceError):
        build_polysquare(cells, v + [((0, 0), (1, 0))], h)


def test_length_mismatch_detected(t_sqrt2):
    t = t_sqrt2
    r = t.generator("r")
    faces = [Face(1, t.one, t.one), Face(2, t.one, r)]
    v = [(EdgeRef(1, Side.R), EdgeRef(2, Side.L)), (EdgeRef(2, Side.R), EdgeRef(1, Side.L))]
    h = [(EdgeRef(1, Side.T), EdgeRef(1, Side.B)), (EdgeRef(2, Side.T), EdgeRef(2, Side.B))]
    with pytest.raises(SurfaceError, match="length"):
        Surface(t, faces, v, h)


def test_disconnected_detected(t_rational):
    t = t_rational
    faces = [Face(1, t.one, t.one), Face(2, t.one, t.one)]
    v = [(EdgeRef(1, Side.R), EdgeRef(1, Side.L)), (EdgeRef(2, Side.R), EdgeRef(2, Side.L))]
    h = [(EdgeRef(1, Side.T), EdgeRef(1, Side.B)), (EdgeRef(2, Side.T), EdgeRef(2, Side.B))]
    with pytest.raises(SurfaceError, match="reachable"):
        Surface(t, faces, v, h)


def test_four_copy_square_is_2x2_torus():
    s = four_copy(polysquare_table({(0, 0)}))
    assert len(s.faces) == 4
    assert s.genus() == 1
    assert s.area().as_rational() == 4


def test_four_copy_lshape():
    table = polysquare_table({(0, 0), (1, 0), (0, 1)})
    s = four_copy(table)
    assert len(s.faces) == 12
    assert s.area().as_rational() == 12
    assert validate(s).ok


def test_four_copy_rejects_closed(octagon):
    with pytest.raises(Exception, match="nothing to unfold"):
        four_copy(octagon)


def test_reglued_side_detected(t_rational):
    t = t_rational
    faces = [Face(1, t.one, t.one)]
    v = [
        (EdgeRef(1, Side.R), EdgeRef(1, Side.L)),
        (EdgeRef(1, Side.R), EdgeRef(1, Side.L)),
    ]
    h = [(EdgeRef(1, Side.T), EdgeRef(1, Side.B))]
    with pytest.raises(SurfaceError, match="glued twice"):
        Surface(t, faces, v, h)
