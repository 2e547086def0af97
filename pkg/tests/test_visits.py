"""Visiting-time search: oracle vs cascade, certificates, reverse phase."""

import random

import pytest

from geoflow.density import (
    HypothesisViolated,
    cascade_search,
    constants,
    endpoint_distance,
    find_visit_oracle,
    octagon_ledger,
    replay_certificate,
    verify_visit,
)
from geoflow.density.visit import locate_time
from geoflow.exactnum import Q
from geoflow.exactnum.cf import PreconditionError
from geoflow.flow import EdgeInterval, Slope
from geoflow.surfaces import VerticalCoord, build_polysquare


@pytest.fixture(scope="module")
def led11():
    return constants(1, 1)


@pytest.fixture(scope="module")
def led13():
    return constants(1, 3)


def test_constants_values():
    led = constants(1, 1)
    assert led.c1 == Q(1, 104976)
    assert led.delta[0] == Q(1, 324)
    assert led.delta[-1] == led.c1
    assert led.c2 == Q(1, 3 * led.c0)
    led23 = constants(2, 3)
    assert led23.c1 == Q(1, 5184 ** 4)
    # c0 dominates both budget sums (here: the reverse-phase sum)
    lead = 9 * 9 * 4
    base = Q(5184 ** 4)
    sum_b = sum(lead * Q(5184) ** i * base ** 3 for i in range(4))
    assert led23.c0 >= sum_b  # sqrt2 factor only increases it


def test_oracle_examples_torus(torus23=None):
    from geoflow.exactnum import tower

    t = tower([])
    torus = build_polysquare({(0, 0)}, tower_spec=t)
    sl = Slope(t.rational(Q(2, 3)))
    qr = EdgeInterval(0, t.zero, t.rational(Q(1, 2)))
    visit = find_visit_oracle(torus, qr, sl)
    # first forward crossing lands at 1/6 inside (0, 1/2): t* = sqrt13/3, h = 1
    assert visit.t_h.as_rational() == 1
    assert visit.at.y.as_rational() == Q(1, 6)


def test_oracle_example_golden(torus, golden_sl):
    t = torus.tower
    qr = EdgeInterval(0, t.zero, t.rational(Q(1, 2)))
    visit = find_visit_oracle(torus, qr, golden_sl)
    # {1/2 + alpha} = 0.118 lands inside on the first forward step
    assert visit.t_h == t.one
    assert visit.at.y == golden_sl.alpha - Q(1, 2)


def test_cascade_certificates_torus(torus, golden_sl, led11):
    t = torus.tower
    rng = random.Random(30)
    for _ in range(40):
        x = Q(1, rng.choice([2, 8, 32, 128]))
        base = Q(rng.randint(1, 999), 1000)
        if not (base + x < 1):
            continue
        qr = EdgeInterval(0, t.rational(base), t.rational(base + x))
        cert = cascade_search(torus, qr, golden_sl, led11)
        assert not cert.t_star_h.is_zero()
        assert led11.visit_bound_ok(golden_sl, cert.t_star_h, qr.length)
        t_star = replay_certificate(torus, cert, golden_sl, led11)
        assert t_star == cert.t_star_h
        oracle = find_visit_oracle(torus, qr, golden_sl)
        assert abs(oracle.t_h) <= abs(cert.t_star_h)
        sep = endpoint_distance(torus, qr, golden_sl, cert.t_star_h, led11)
        assert sep.ok
        assert sep.dist_bottom + sep.dist_top == qr.length


def test_visit_point_membership(lshape_sqrt2, sqrt2m1_sl):
    t = lshape_sqrt2.tower
    led = constants(2, 3)
    qr = EdgeInterval(1, t.rational(Q(3, 10)), t.rational(Q(7, 10)))
    cert = cascade_search(lshape_sqrt2, qr, sqrt2m1_sl, led)
    p = verify_visit(lshape_sqrt2, qr, sqrt2m1_sl, cert.t_star_h)
    assert p.edge == qr.edge and qr.lo < p.y and p.y < qr.hi


def test_forced_reverse_phase(lshape, golden_sl, led13):
    t = lshape.tower
    qr = EdgeInterval(0, t.rational(Q(1, 5)), t.rational(Q(7, 10)))
    cert = cascade_search(lshape, qr, golden_sl, led13, force_reverse_after=1)
    assert cert.steps[0].collapsed
    assert cert.reason in ("claim3-return", "claim4-edge-repetition")
    assert any(s.direction == "R" for s in cert.steps) or cert.final.j_cur is not None
    replay_certificate(lshape, cert, golden_sl, led13)
    verify_visit(lshape, qr, golden_sl, cert.t_star_h)


def test_genuine_collapse_reverse_phase(torus, golden_sl, led11):
    t = torus.tower
    eps = Q(1, 10 ** 7)
    y_star = 1 - golden_sl.alpha  # break height of the first shift
    qr = EdgeInterval(0, y_star - Q(1, 4) + eps, y_star + eps)
    cert = cascade_search(torus, qr, golden_sl, led11)
    assert cert.steps[0].collapsed
    assert float(cert.steps[0].length) < 1e-6
    # reverse-phase floors were asserted during the search (genuine collapse)
    replay_certificate(torus, cert, golden_sl, led11)
    sep = endpoint_distance(torus, qr, golden_sl, cert.t_star_h, led11)
    assert sep.ok
    oracle = find_visit_oracle(torus, qr, golden_sl)
    assert abs(oracle.t_h) <= abs(cert.t_star_h)


def test_octagon_cascade(octagon, octagon_sl):
    t = octagon.tower
    led = octagon_ledger(octagon_sl.alpha, t.generator("r"))
    assert led.mode == "octagon"
    qr = EdgeInterval(2, t.rational(Q(3, 10)), t.rational(Q(3, 10) + Q(1, 8)))
    cert = cascade_search(octagon, qr, octagon_sl, led)
    assert led.visit_bound_ok(octagon_sl, cert.t_star_h, qr.length)
    replay_certificate(octagon, cert, octagon_sl, led)
    sep = endpoint_distance(octagon, qr, octagon_sl, cert.t_star_h, led)
    assert sep.ok
    oracle = find_visit_oracle(octagon, qr, octagon_sl)
    assert abs(oracle.t_h) <= abs(cert.t_star_h)


def test_octagon_long_edge_interval(octagon, octagon_sl):
    t = octagon.tower
    led = octagon_ledger(octagon_sl.alpha, t.generator("r"))
    # interval on a sqrt2 edge reaching above height 1
    qr = EdgeInterval(5, t.rational(Q(11, 10)), t.rational(Q(13, 10)))
    cert = cascade_search(octagon, qr, octagon_sl, led)
    replay_certificate(octagon, cert, octagon_sl, led)
    verify_visit(octagon, qr, octagon_sl, cert.t_star_h)


def test_rational_slope_violates_hypothesis(torus23=None):
    from geoflow.exactnum import tower

    t = tower([])
    torus = build_polysquare({(0, 0)}, tower_spec=t)
    sl = Slope(t.rational(Q(2, 3)))
    led = constants(1, 1)
    qr = EdgeInterval(0, t.rational(Q(1, 10)), t.rational(Q(2, 10)))
    with pytest.raises(HypothesisViolated):
        cascade_search(torus, qr, sl, led)


def test_locate_time(torus, golden_sl):
    t = torus.tower
    start = VerticalCoord(0, t.rational(Q(1, 2)))
    p = locate_time(torus, start, golden_sl, t.rational(5))
    from geoflow.flow import trace

    res = trace(torus, start, golden_sl, max_crossings=5)
    assert p == VerticalCoord(res.crossings[-1].edge, res.crossings[-1].y)
    q = locate_time(torus, start, golden_sl, t.rational(-3))
    res2 = trace(torus, start, golden_sl, reverse=True, max_crossings=3)
    assert q == VerticalCoord(res2.crossings[-1].edge, res2.crossings[-1].y)
    with pytest.raises(PreconditionError):
        locate_time(torus, start, golden_sl, t.rational(Q(1, 2)))


def test_tampered_certificate_rejected(torus, golden_sl, led11):
    from dataclasses import replace

    t = torus.tower
    qr = EdgeInterval(0, t.rational(Q(1, 10)), t.rational(Q(3, 5)))
    cert = cascade_search(torus, qr, golden_sl, led11)
    bad = replace(cert, t_star_h=cert.t_star_h + 1)
    with pytest.raises(AssertionError):
        replay_certificate(torus, bad, golden_sl, led11)
