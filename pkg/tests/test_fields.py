"""Tower field arithmetic: exactness, certified signs, approximations."""

import random
from fractions import Fraction

import mpmath
import pytest

from geoflow.exactnum import (
    Q,
    TowerError,
    approx,
    dist_nearest_int,
    expr_text,
    sign,
    tower,
)
from geoflow.exactnum.cf import PreconditionError


def random_element(t, rng, span=20):
    return t.element([Q(rng.randint(-span, span), rng.randint(1, 7)) for _ in range(t.degree)])


def test_tower_structure(t_oct):
    assert t_oct.degree == 6
    r = t_oct.generator("r")
    c = t_oct.generator("c")
    assert (r * r).as_rational() == 2
    assert (c * c * c).as_rational() == 3
    assert ((r * c) ** 6).as_rational() == 72


def test_basis_order_is_lexicographic(t_oct):
    # 1, c, c*c, r, r*c, r*c*c
    names = [t_oct.monomial_name(i) for i in range(6)]
    assert names == ["", "c", "c*c", "r", "r*c", "r*c*c"]


def test_reducible_towers_rejected():
    with pytest.raises(TowerError):
        tower([("a", 2, 4)])  # 4 is a square
    with pytest.raises(TowerError):
        tower([("a", 2, 2), ("b", 2, 8)])  # sqrt8 = 2*sqrt2
    with pytest.raises(TowerError):
        tower([("a", 3, 27)])
    with pytest.raises(TowerError):
        tower([("a", 3, 2), ("b", 3, 16)])  # 16 = 2 * 2^3
    # valid towers construct fine
    assert tower([("a", 2, 2), ("b", 2, 3)]).degree == 4
    assert tower([("a", 3, 2), ("b", 3, 3)]).degree == 9
    assert tower([("a", 2, 2), ("b", 3, 2)]).degree == 6


def test_sqrt6_over_sqrt2_sqrt3_rejected():
    with pytest.raises(TowerError):
        tower([("a", 2, 2), ("b", 2, 3), ("c", 2, 6)])


def test_ring_axioms_hold_exactly(t_oct):
    rng = random.Random(1)
    for _ in range(10_000):
        a = random_element(t_oct, rng, span=9)
        b = random_element(t_oct, rng, span=9)
        c = random_element(t_oct, rng, span=9)
        assert (a + b) * c == a * c + b * c
        assert (a * b) * c == a * (b * c)
        assert (a - b) + b == a


def test_sign_multiplicative(t_oct):
    rng = random.Random(2)
    for _ in range(400):
        a = random_element(t_oct, rng)
        b = random_element(t_oct, rng)
        assert sign(a * b) == sign(a) * sign(b)


def test_inverse_exact(t_oct):
    rng = random.Random(3)
    for _ in range(200):
        a = random_element(t_oct, rng)
        if a.is_zero():
            continue
        assert (a * a.inverse()) == t_oct.one
    with pytest.raises(ZeroDivisionError):
        t_oct.zero.inverse()


def test_sign_examples(t_oct):
    r = t_oct.generator("r")
    c = t_oct.generator("c")
    assert sign(t_oct.zero) == 0
    assert sign(r - 1) == 1
    # checked against a 50-digit numeric evaluation
    mpmath.mp.dps = 50
    val = 3 * mpmath.cbrt(3) - 2 * mpmath.sqrt(2) * mpmath.cbrt(3) + 1 - mpmath.sqrt(2)
    expected = 1 if val > 0 else -1
    assert sign(3 * c - 2 * r * c + 1 - r) == expected == -1


def test_sign_against_numeric_oracle(t_oct):
    mpmath.mp.dps = 50
    r_n = mpmath.sqrt(2)
    c_n = mpmath.cbrt(3)
    monos = [1, c_n, c_n ** 2, r_n, r_n * c_n, r_n * c_n ** 2]
    rng = random.Random(4)
    for _ in range(300):
        x = random_element(t_oct, rng)
        numeric = sum(
            mpmath.mpf(c.numerator) / mpmath.mpf(c.denominator) * m
            for c, m in zip(x.coords, monos)
        )
        if abs(numeric) < mpmath.mpf("1e-40"):
            assert x.is_zero()
        else:
            assert sign(x) == (1 if numeric > 0 else -1)


def test_approx_contract(t_oct):
    r = t_oct.generator("r")
    c = t_oct.generator("c")
    a = approx(r, Q(1, 1000))
    assert abs(a * a - 2) < Q(1, 100)  # |sqrt2 - a| < 1e-3 forces a^2 near 2
    assert approx(t_oct.zero, Q(1, 10)) == 0

    # cbrt3/2 against an independent bisection root of 8 y^3 = 3
    target = c / 2
    got = approx(target, Q(1, 10 ** 6))
    lo, hi = Fraction(0), Fraction(1)
    for _ in range(40):
        mid = (lo + hi) / 2
        if 8 * mid ** 3 < 3:
            lo = mid
        else:
            hi = mid
    assert abs(Fraction(got.numerator, got.denominator) - lo) < Fraction(2, 10 ** 6)


def test_enclosure_certifies(t_oct):
    rng = random.Random(5)
    mpmath.mp.dps = 50
    monos = [
        1,
        mpmath.cbrt(3),
        mpmath.cbrt(3) ** 2,
        mpmath.sqrt(2),
        mpmath.sqrt(2) * mpmath.cbrt(3),
        mpmath.sqrt(2) * mpmath.cbrt(3) ** 2,
    ]
    for _ in range(100):
        x = random_element(t_oct, rng)
        lo, hi = x.enclosure(64)
        numeric = sum(
            mpmath.mpf(c.numerator) / mpmath.mpf(c.denominator) * m
            for c, m in zip(x.coords, monos)
        )
        assert mpmath.mpf(lo.numerator) / mpmath.mpf(lo.denominator) <= numeric
        assert numeric <= mpmath.mpf(hi.numerator) / mpmath.mpf(hi.denominator)


def test_dist_nearest_int(t_sqrt5, golden):
    t = t_sqrt5
    assert dist_nearest_int(t.rational(Q(1, 2))).as_rational() == Q(1, 2)
    assert dist_nearest_int(t.rational(7)).is_zero()
    # nearest integer to (sqrt5-1)/2 ~ 0.618 is 1
    d = dist_nearest_int(golden)
    assert d == 1 - golden
    assert expr_text(d) == "3/2 - 1/2*n"


def test_floor_and_comparisons(t_oct):
    r = t_oct.generator("r")
    c = t_oct.generator("c")
    assert (10 * r).floor() == 14  # 14.142...
    assert (c * c).floor() == 2  # 2.08...
    assert (-r).floor() == -2
    assert r < c  # 1.414 < 1.442
    assert r * c > 2
    assert (r - 1) < Q(1, 2)


def test_expr_text_roundtrip_values(t_oct):
    rng = random.Random(6)
    from geoflow.netformat import parse_expr_text

    for _ in range(50):
        x = random_element(t_oct, rng)
        assert parse_expr_text(t_oct, expr_text(x)) == x


def test_float_shadow_accuracy(t_oct):
    rng = random.Random(7)
    for _ in range(100):
        x = random_element(t_oct, rng)
        shadow = float(x)
        certified = float(x.approx(Q(1, 10 ** 25)))
        assert abs(shadow - certified) <= 1e-9 * (1 + abs(certified))
