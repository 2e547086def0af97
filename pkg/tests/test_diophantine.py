"""Norms, characteristic polynomials and linear-form lower bounds."""

import random

import pytest

from geoflow.exactnum import (
    Q,
    certified_form_constant,
    char_poly,
    dist_nearest_int,
    empirical_c5,
    field_norm,
    linear_form_bound_details,
    linear_form_lower_bound,
    tower,
)
from geoflow.exactnum.cf import PreconditionError
from geoflow.exactnum.diophantine import (
    DegenerateFormError,
    _char_poly_int,
    _form_value,
)
from geoflow.exactnum.fields import multiplication_matrix


@pytest.fixture(scope="module")
def oct_pair(t_oct):
    return t_oct.generator("c") / 2, t_oct.generator("r")


def test_norm_examples(t_oct):
    r = t_oct.generator("r")
    c = t_oct.generator("c")
    assert field_norm(t_oct.one) == 1
    # conjugates of sqrt2 appear 3 times each: (sqrt2)^3 * (-sqrt2)^3 = -8
    assert field_norm(r) == -8
    # conjugates of cbrt3 appear twice each: 3^2 = 9
    assert field_norm(c) == 9
    assert field_norm(t_oct.zero) == 0


def test_norm_multiplicative(t_oct):
    rng = random.Random(10)
    for _ in range(100):
        a = t_oct.element([Q(rng.randint(-5, 5)) for _ in range(6)])
        b = t_oct.element([Q(rng.randint(-5, 5)) for _ in range(6)])
        assert field_norm(a * b) == field_norm(a) * field_norm(b)
        if not a.is_zero():
            assert field_norm(a) != 0


def test_char_poly_consistent_with_norm(t_oct):
    rng = random.Random(11)
    for _ in range(50):
        a = t_oct.element([Q(rng.randint(-4, 4)) for _ in range(6)])
        chi = char_poly(a)
        assert chi[-1] == 1
        assert chi[0] == field_norm(a)  # (-1)^d * det((-1) ...) at even degree 6
        if not a.is_zero():
            # the element satisfies its characteristic polynomial
            acc = t_oct.zero
            power = t_oct.one
            for coeff in chi:
                acc = acc + coeff * power
                power = power * a
            assert acc.is_zero()


def test_char_poly_int_route_matches(t_oct):
    rng = random.Random(12)
    for _ in range(30):
        a = t_oct.element([Q(rng.randint(-9, 9)) for _ in range(6)])
        m = [[int(v) for v in row] for row in multiplication_matrix(a)]
        assert _char_poly_int(m) == [int(q) for q in char_poly(a)]


def test_bound_examples(oct_pair, t_oct):
    alpha, beta = oct_pair
    # (1,0,0): bound must stay below dist(cbrt3/2, Z) ~ 0.2789
    b = linear_form_lower_bound(1, 0, 0, alpha, beta)
    d = dist_nearest_int(alpha)
    assert 0 < b.as_rational()
    assert b <= d
    # (0,1,0): below dist(sqrt2*cbrt3/2, Z)
    b2 = linear_form_lower_bound(0, 1, 0, alpha, beta)
    assert b2 <= dist_nearest_int(beta * alpha)
    with pytest.raises(PreconditionError):
        linear_form_lower_bound(0, 0, 1, alpha, beta)


def test_bound_soundness_box20(oct_pair):
    alpha, beta = oct_pair
    for n1 in range(-20, 21):
        for n2 in range(-20, 21):
            if n1 == 0 and n2 == 0:
                continue
            for n3 in (-20, -7, 0, 7, 20):
                b = linear_form_lower_bound(n1, n2, n3, alpha, beta)
                d = dist_nearest_int(_form_value(n1, n2, n3, alpha, beta))
                assert b <= d, (n1, n2, n3)


def test_clearing_constant(oct_pair):
    alpha, beta = oct_pair
    det = linear_form_bound_details(3, -2, 5, alpha, beta)
    assert det.c4 == 2  # doubled slope data are algebraic integers
    assert all(c.denominator == 1 for c in det.char_poly)


def test_degenerate_forms():
    t = tower([("r", 2, 2)])
    r = t.generator("r")
    with pytest.raises(DegenerateFormError):
        # n1*r + n2*r*r - n3*r integer when n1 == n3: 1*r + 1*2 - 1*r = 2
        linear_form_lower_bound(1, 1, 1, r, r)
    with pytest.raises(DegenerateFormError):
        empirical_c5(t.rational(Q(1, 3)), t.rational(Q(1, 7)), 2)


def test_empirical_min(oct_pair):
    alpha, beta = oct_pair
    rep = empirical_c5(alpha, beta, 20)
    assert rep.value_upper > 0
    assert rep.exponent == 5
    # running minimum is non-increasing (set inclusion is structural)
    vals = [v for _, v in rep.per_n]
    assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))
    # the reported winner is consistent with a direct evaluation
    n1, n2, n3 = rep.argmin
    d = dist_nearest_int(_form_value(n1, n2, n3, alpha, beta))
    n = max(abs(n1), abs(n2), abs(n3))
    assert rep.value == n ** 5 * d


def test_certified_constant_below_empirical(oct_pair):
    alpha, beta = oct_pair
    cert = certified_form_constant(alpha, beta)
    rep = empirical_c5(alpha, beta, 12)
    assert cert.exponent == 5
    assert 0 < cert.c < 1
    assert cert.c <= rep.value_upper
    # uniform bound check on the box: c/N^5 < dist for every triple
    for n1 in range(-12, 13):
        for n2 in range(-12, 13):
            if n1 == n2 == 0:
                continue
            n3 = (n1 * n2) % 7 - 3
            n = max(abs(n1), abs(n2), abs(n3))
            d = dist_nearest_int(_form_value(n1, n2, n3, alpha, beta))
            assert d * n ** 5 > cert.c
