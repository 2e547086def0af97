"""Point and interval transport: spec examples, conservation, reversibility."""

import random

import pytest

from geoflow.exactnum import Q, expr_text
from geoflow.flow import (
    Crossing,
    EdgeInterval,
    ShiftEngine,
    SingularHit,
    Slope,
    crossing_identity_residual,
    face_passages,
    first_return_map,
    shift_interval,
    shift_point,
    trace,
)
from geoflow.surfaces import VerticalCoord, build_polysquare


@pytest.fixture(scope="module")
def torus23():
    from geoflow.exactnum import tower

    t = tower([])
    return build_polysquare({(0, 0)}, tower_spec=t), Slope(t.rational(Q(2, 3)))


def test_shift_point_examples(torus23):
    torus, sl = torus23
    t = torus.tower
    p, w, wrapped = shift_point(torus, VerticalCoord(0, t.rational(Q(1, 4))), sl)
    assert (p.edge, p.y.as_rational(), w.as_rational(), wrapped) == (0, Q(11, 12), 1, [])

    sl34 = Slope(t.rational(Q(3, 4)))
    p, w, wrapped = shift_point(torus, VerticalCoord(0, t.rational(Q(1, 2))), sl34)
    assert p.y.as_rational() == Q(1, 4)
    assert len(wrapped) == 1

    with pytest.raises(SingularHit):
        shift_point(torus, VerticalCoord(0, t.rational(Q(1, 3))), sl)


def test_shift_interval_examples(torus23):
    torus, sl = torus23
    t = torus.tower
    out = shift_interval(torus, EdgeInterval(0, t.rational(Q(1, 10)), t.rational(Q(2, 10))), sl)
    assert not out.split
    assert (out.image.lo.as_rational(), out.image.hi.as_rational()) == (Q(23, 30), Q(13, 15))

    out = shift_interval(torus, EdgeInterval(0, t.rational(Q(2, 10)), t.rational(Q(5, 10))), sl)
    assert out.split
    assert (out.top.lo.as_rational(), out.top.hi.as_rational()) == (0, Q(1, 6))
    assert (out.bottom.lo.as_rational(), out.bottom.hi.as_rational()) == (Q(13, 15), 1)
    assert out.top.length + out.bottom.length == Q(3, 10)
    assert len(out.vertices) == 1 and not out.vertices[0].singular


def test_trace_period_three(torus23):
    torus, sl = torus23
    t = torus.tower
    result = trace(torus, VerticalCoord(0, t.rational(Q(1, 4))), sl, max_crossings=3)
    ys = [c.y.as_rational() for c in result]
    assert ys == [Q(11, 12), Q(7, 12), Q(1, 4)]
    assert [c.t_h.as_rational() for c in result] == [1, 2, 3]
    assert not result.truncated


def test_trace_reverse_inverts(lshape, golden_sl):
    t = lshape.tower
    rng = random.Random(20)
    for _ in range(200):
        e = rng.randrange(3)
        y = t.rational(Q(rng.randint(1, 999), 1000))
        p0 = VerticalCoord(e, y)
        p1, w1, _ = shift_point(lshape, p0, golden_sl)
        p2, w2, _ = shift_point(lshape, p1, golden_sl, reverse=True)
        assert p2 == p0 and w1 == w2


def test_trace_distinct_heights(torus, golden_sl):
    t = torus.tower
    result = trace(torus, VerticalCoord(0, t.rational(Q(1, 2))), golden_sl, max_crossings=500)
    seen = set()
    for c in result:
        assert c.y not in seen
        seen.add(c.y)


def test_counter_identity_polysquare(lshape, golden_sl):
    t = lshape.tower
    start = VerticalCoord(1, t.rational(Q(2, 7)))
    result = trace(lshape, start, golden_sl, max_crossings=300)
    for c in list(result)[::37]:
        assert c.n2 == 0 and c.n3 == 0
        assert crossing_identity_residual(lshape, golden_sl, start, c).is_zero()


def test_counter_identity_octagon(octagon, octagon_sl):
    t = octagon.tower
    start = VerticalCoord(2, t.rational(Q(3, 7)))
    result = trace(octagon, start, octagon_sl, max_crossings=500)
    last = result.crossings[-1]
    assert last.n1 + last.n2 == 500
    for c in list(result)[::59]:
        assert crossing_identity_residual(octagon, octagon_sl, start, c).is_zero()
    # reverse from the end returns home
    back = trace(
        octagon, VerticalCoord(last.edge, last.y), octagon_sl,
        reverse=True, max_crossings=500,
    )
    end = back.crossings[-1]
    assert (end.edge, end.y) == (start.edge, start.y)


def test_split_conservation_random(octagon, octagon_sl):
    t = octagon.tower
    rng = random.Random(21)
    splits = 0
    for _ in range(500):
        e = rng.randrange(7)
        L = octagon.edge_length(e)
        lo = t.rational(Q(rng.randint(0, 200), 100))
        ln = t.rational(Q(rng.randint(1, 40), 100))
        if not (lo + ln < L):
            continue
        iv = EdgeInterval(e, lo, lo + ln)
        out = shift_interval(octagon, iv, octagon_sl, reverse=rng.random() < 0.5)
        if out.split:
            splits += 1
            assert sum((p.length for p in out.pieces), t.zero) == iv.length
            assert len(out.vertices) == len(out.pieces) - 1
        else:
            assert out.image.length == iv.length
    assert splits > 20


def test_return_map_partitions(lshape, golden_sl):
    t = lshape.tower
    rm = first_return_map(lshape, golden_sl)
    total = t.zero
    for e, pieces in rm.items():
        # sources tile the edge
        cursor = t.zero
        for piece in pieces:
            assert piece.src.lo == cursor
            assert piece.src.length == piece.dst.length
            cursor = piece.src.hi
            total = total + piece.src.length
        assert cursor == lshape.edge_length(e)
    assert total == lshape.total_vertical_length()
    # images tile the edges too (bijectivity up to endpoints)
    by_edge = {}
    for pieces in rm.values():
        for piece in pieces:
            by_edge.setdefault(piece.dst.edge, []).append(piece.dst)
    for e, images in by_edge.items():
        images.sort(key=lambda iv: float(iv.lo))
        cursor = t.zero
        for iv in images:
            assert iv.lo == cursor
            cursor = iv.hi
        assert cursor == lshape.edge_length(e)


def test_interval_agrees_with_point_samples(octagon, octagon_sl):
    t = octagon.tower
    rng = random.Random(22)
    cases = 0
    while cases < 150:
        e = rng.randrange(7)
        L = octagon.edge_length(e)
        lo = t.rational(Q(rng.randint(0, 220), 100))
        ln = t.rational(Q(rng.randint(1, 30), 100))
        if not (lo + ln < L):
            continue
        cases += 1
        iv = EdgeInterval(e, lo, lo + ln)
        reverse = rng.random() < 0.5
        out = shift_interval(octagon, iv, octagon_sl, reverse=reverse)
        pieces = [out.image] if not out.split else list(out.pieces)
        offsets = [lo + Q(i, 17) * ln for i in range(1, 17)]
        piece_idx = 0
        consumed = t.zero
        for y in offsets:
            p, _, _ = shift_point(octagon, VerticalCoord(e, y), octagon_sl, reverse=reverse)
            # locate the sample in the (ordered) piece decomposition
            while y - lo >= consumed + pieces[piece_idx].length:
                consumed = consumed + pieces[piece_idx].length
                piece_idx += 1
            piece = pieces[piece_idx]
            assert p.edge == piece.edge
            assert p.y == piece.lo + ((y - lo) - consumed)


def test_engine_matches_generic(lshape, golden_sl):
    t = lshape.tower
    rng = random.Random(23)
    for reverse in (False, True):
        eng = ShiftEngine(lshape, golden_sl, reverse=reverse)
        for _ in range(300):
            e = rng.randrange(3)
            lo = Q(rng.randint(0, 950), 1000)
            hi = lo + Q(rng.randint(1, 49), 1000)
            iv = EdgeInterval(e, t.rational(lo), t.rational(hi))
            a = eng.shift(iv)
            b = shift_interval(lshape, iv, golden_sl, reverse=reverse)
            assert a.split == b.split
            if a.split:
                assert a.pieces == b.pieces
            else:
                assert a.image == b.image


def test_face_passages_cover_shift(octagon, octagon_sl):
    t = octagon.tower
    start = VerticalCoord(0, t.rational(Q(1, 3)))
    gen = face_passages(octagon, start, octagon_sl)
    segs = [next(gen) for _ in range(40)]
    for seg in segs:
        f = octagon.faces[seg.face]
        assert seg.x_in >= 0 and seg.x_out <= f.width
        assert seg.x_in < seg.x_out
        # the segment obeys the slope
        assert (seg.y_out - seg.y_in) == octagon_sl.alpha * (seg.x_out - seg.x_in)


def test_max_time_stop(torus, golden_sl):
    t = torus.tower
    res = trace(torus, VerticalCoord(0, t.rational(Q(1, 2))), golden_sl, max_time=Q(10))
    # every crossing within the horizon, next one beyond
    assert all(golden_sl.time_leq(c.t_h, Q(10)) for c in res)
    assert len(res) >= 1
    res2 = trace(torus, VerticalCoord(0, t.rational(Q(1, 2))), golden_sl,
                 max_crossings=len(res) + 1)
    assert not golden_sl.time_leq(res2.crossings[-1].t_h, Q(10))
