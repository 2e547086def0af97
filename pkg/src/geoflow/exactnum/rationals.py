"""Exact rational arithmetic backend.

All geometry in this package is done with arbitrary-precision rationals.
Two interchangeable backends are supported and selected once at import:

* ``gmpy2.mpq`` (GMP, compiled) -- the fast path, used when importable;
* ``fractions.Fraction`` -- pure-Python fallback, always available.

Set ``GEOFLOW_RATIONAL=fractions`` (or ``gmpy2``) to force a backend; see
``benchmarks/bench_rationals.py`` for a throughput comparison.  Both
backends expose ``.numerator``/``.denominator`` and exact comparisons, so
the rest of the package is backend-agnostic.
"""

from __future__ import annotations

import math
import numbers
import os

_requested = os.environ.get("GEOFLOW_RATIONAL", "auto").lower()

if _requested not in ("auto", "gmpy2", "fractions"):
    raise RuntimeError(f"GEOFLOW_RATIONAL must be auto|gmpy2|fractions, got {_requested!r}")

if _requested in ("auto", "gmpy2"):
    try:
        from gmpy2 import mpq as Q  # type: ignore

        BACKEND = "gmpy2"
    except ImportError:
        if _requested == "gmpy2":
            raise
        from fractions import Fraction as Q

        BACKEND = "fractions"
else:
    from fractions import Fraction as Q

    BACKEND = "fractions"

QLike = numbers.Rational

ZERO = Q(0)
ONE = Q(1)
HALF = Q(1, 2)


def is_rational(x) -> bool:
    return isinstance(x, numbers.Rational)


def qify(x) -> "Q":
    """Coerce an int, Fraction, mpq or "p/q" string to the backend rational."""
    if isinstance(x, str):
        return Q(x)
    if isinstance(x, numbers.Rational):
        return Q(x.numerator, x.denominator)
    raise TypeError(f"not an exact rational: {x!r}")


def q_floor(q) -> int:
    return int(q.numerator // q.denominator)


def q_ceil(q) -> int:
    return int(-((-q.numerator) // q.denominator))


def q_round_nearest(q) -> int:
    """Nearest integer; exact halves round up (either choice is a nearest integer)."""
    return q_floor(q + HALF)


def iroot_floor(n: int, e: int) -> int:
    """floor(n ** (1/e)) for n >= 0 by integer arithmetic only."""
    if n < 0:
        raise ValueError("iroot_floor needs n >= 0")
    if n == 0:
        return 0
    if e == 1:
        return n
    if e == 2:
        return math.isqrt(n)
    # Newton iteration with a bit-length seed; converges in a few steps.
    x = 1 << (n.bit_length() + e - 1) // e
    while True:
        y = ((e - 1) * x + n // x ** (e - 1)) // e
        if y >= x:
            break
        x = y
    while x ** e > n:
        x -= 1
    while (x + 1) ** e <= n:
        x += 1
    return x


def q_sqrt_ceil(q) -> int:
    """Smallest integer n with n >= sqrt(q), for q >= 0."""
    if q < 0:
        raise ValueError("negative radicand")
    # n >= sqrt(a/b)  <=>  n*n*b >= a
    a, b = q.numerator, q.denominator
    n = math.isqrt(a // b)
    while n * n * b < a:
        n += 1
    return n


def is_perfect_power(n: int, e: int) -> bool:
    if n < 0:
        return False
    r = iroot_floor(n, e)
    return r ** e == n


def lcm_denominators(qs) -> int:
    acc = 1
    for q in qs:
        acc = acc * q.denominator // math.gcd(acc, int(q.denominator))
    return acc
