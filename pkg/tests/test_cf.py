"""Continued fractions and the distance-to-integers inequality."""

import pytest

from geoflow.exactnum import Q, cf_digits, cf_value, check_bad_approx_bound, tower
from geoflow.exactnum.cf import BadApproxCounterexample, PreconditionError


def test_golden_ratio_digits(golden):
    cf = cf_digits(golden, 5)
    assert cf.digits == (1, 1, 1, 1, 1)
    assert cf.periodic_tail is not None
    assert not cf.terminated


def test_sqrt2_minus_one_digits(t_sqrt2):
    x = t_sqrt2.generator("r") - 1
    cf = cf_digits(x, 4)
    assert cf.digits == (2, 2, 2, 2)
    assert cf.periodic_tail is not None


def test_rational_terminates(t_rational):
    cf = cf_digits(t_rational.rational(Q(2, 7)), 10)
    assert cf.digits == (3, 2)
    assert cf.terminated
    assert cf_value(cf, t_rational).as_rational() == Q(2, 7)


def test_periodic_reconstruction(t_sqrt2):
    # cutting the expansion at the period and solving back gives the value
    x = t_sqrt2.generator("r") - 1  # digits all 2
    cf = cf_digits(x, 12)
    start, period = cf.periodic_tail
    # the tail state equals the original state, so x = 1/(2 + x)
    assert (1 / (2 + x)) == x


def test_higher_degree_digits(t_oct, octagon_sl):
    # cbrt3/2: no quadratic periodicity, digits still exact
    cf = cf_digits(octagon_sl.alpha, 12)
    assert cf.periodic_tail is None
    assert all(d >= 1 for d in cf.digits)
    # spot value: the final convergent approximates the slope to 1/q^2
    p_prev, p = 1, 0
    q_prev, q = 0, 1
    for a in cf.digits:
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
    assert abs(octagon_sl.alpha - Q(p, q)) < Q(1, q * q)


def test_bad_approx_golden(golden):
    report = check_bad_approx_bound(golden, 1, 1000)
    assert report.passed
    assert report.min_value > 1
    fib = {1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 610, 987}
    assert report.argmin_n in fib
    assert report.digits_complete


def test_bad_approx_sqrt2(t_sqrt2):
    report = check_bad_approx_bound(t_sqrt2.generator("r") - 1, 2, 1000)
    assert report.passed
    assert report.min_value > 1


def test_bad_approx_rejects_rational(t_rational):
    with pytest.raises(PreconditionError):
        check_bad_approx_bound(t_rational.rational(Q(1, 2)), 1, 10)


def test_bad_approx_rejects_wrong_bound(golden):
    # claiming digits <= A for too-small A is caught before the loop
    with pytest.raises(PreconditionError):
        check_bad_approx_bound(golden * golden, 1, 10)  # digits of 0.381..: [2,1,1,..]


def test_digit_bound_checked(t_sqrt2):
    with pytest.raises(PreconditionError):
        check_bad_approx_bound(t_sqrt2.generator("r") - 1, 1, 10)  # digits are 2
