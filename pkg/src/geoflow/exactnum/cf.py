"""Continued fractions of field elements and the digit-bound distance inequality.

For an irrational alpha in (0,1) whose continued fraction digits are all at
most A, every n >= 1 satisfies dist(n*alpha, Z) > 1/((A+2)*n).  The check
here verifies that inequality exhaustively with exact arithmetic; a
counterexample aborts loudly since it would mean a bug somewhere in the
arithmetic, not new mathematics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .fields import FieldElement
from .rationals import ONE, Q


class PreconditionError(ValueError):
    """An operation was called outside its stated domain."""


@dataclass(frozen=True)
class ContinuedFraction:
    digits: tuple[int, ...]
    periodic_tail: tuple[int, int] | None = None  # (start index, period length)
    terminated: bool = False  # rational input, full finite expansion

    def __post_init__(self):
        if any(d < 1 for d in self.digits):
            raise ValueError(f"continued fraction digits must be >= 1: {self.digits}")

    def digit(self, i: int) -> int:
        """i-th digit (0-based), extending through the periodic tail if present."""
        if i < len(self.digits):
            return self.digits[i]
        if self.periodic_tail is None:
            raise IndexError(i)
        start, period = self.periodic_tail
        return self.digits[start + (i - start) % period]

    @property
    def max_digit(self) -> int:
        return max(self.digits)


def cf_digits(x: FieldElement, n: int) -> ContinuedFraction:
    """First n continued fraction digits of x in (0,1).

    Remainder states are exact field elements, so for quadratic irrationals
    the eventual state repetition is detected exactly and the expansion is
    returned with its periodic tail.  Rational x yields the full finite
    expansion flagged as terminated.
    """
    if n < 1:
        raise PreconditionError("need n >= 1")
    if not (x > 0 and x < 1):
        raise PreconditionError("cf_digits needs 0 < x < 1")
    digits: list[int] = []
    seen: dict[FieldElement, int] = {x: 0}
    state = x
    tail = None
    terminated = False
    while len(digits) < n:
        if state.is_zero():
            terminated = True
            break
        inv = 1 / state
        a = inv.floor()
        digits.append(a)
        state = inv - a
        k = len(digits)
        if not state.is_zero():
            prev = seen.get(state)
            if prev is not None:
                tail = (prev, k - prev)
                break
            seen[state] = k
    if tail is not None:
        start, period = tail
        while len(digits) < n:
            digits.append(digits[start + (len(digits) - start) % period])
    return ContinuedFraction(tuple(digits), periodic_tail=tail, terminated=terminated)


def cf_value(cf: ContinuedFraction, tower) -> FieldElement:
    """Value of a finite expansion (terminated ones reconstruct exactly)."""
    if not cf.terminated:
        raise ValueError("only finite expansions are reconstructed here")
    acc = tower.rational(Q(cf.digits[-1]))
    for a in reversed(cf.digits[:-1]):
        acc = tower.rational(a) + 1 / acc
    return 1 / acc


@dataclass
class BadApproxReport:
    """Result of the exhaustive dist(n*alpha, Z) > 1/((A+2) n) verification."""

    A: int
    n_max: int
    passed: bool
    min_value: FieldElement  # min over n of (A+2) * n * dist(n*alpha, Z); must exceed 1
    argmin_n: int
    digits_verified: int  # how many digits were certified <= A (all, if periodic)
    digits_complete: bool  # True when the periodic tail certified every digit
    failures: list = field(default_factory=list)


class BadApproxCounterexample(RuntimeError):
    """The inequality failed for some n; signals an arithmetic bug."""


def check_bad_approx_bound(alpha: FieldElement, A: int, n_max: int) -> BadApproxReport:
    """Verify (A+2)*n*dist(n*alpha, Z) > 1 for all 1 <= n <= n_max, exactly.

    Precondition: alpha in (0,1) irrational with all continued fraction
    digits <= A.  Digits are certified from the periodic tail when the
    expansion repeats (all quadratic presets); otherwise the first 64 are
    checked and the report says so.
    """
    if A < 1 or n_max < 1:
        raise PreconditionError("need A >= 1 and n_max >= 1")
    if not (alpha > 0 and alpha < 1):
        raise PreconditionError("alpha must lie in (0,1)")
    cf = cf_digits(alpha, 64)
    if cf.terminated:
        raise PreconditionError("alpha is rational, not badly approximable")
    if cf.max_digit > A:
        raise PreconditionError(
            f"continued fraction digit {cf.max_digit} exceeds the declared bound {A}"
        )
    digits_complete = cf.periodic_tail is not None

    coeff = A + 2
    frac = alpha  # exact fractional part of n*alpha
    one = alpha.tower.one
    min_value = None
    argmin = 0
    for n in range(1, n_max + 1):
        dist = frac if frac <= HALF_ELEM(alpha.tower) else one - frac
        value = coeff * n * dist
        if value <= 1:
            raise BadApproxCounterexample(
                f"(A+2)*n*dist(n*alpha,Z) = {value!r} <= 1 at n={n}"
            )
        if min_value is None or value < min_value:
            min_value, argmin = value, n
        frac = frac + alpha
        if frac >= 1:
            frac = frac - 1
    return BadApproxReport(
        A=A,
        n_max=n_max,
        passed=True,
        min_value=min_value,
        argmin_n=argmin,
        digits_verified=len(cf.digits),
        digits_complete=digits_complete,
    )


_half_cache: dict[int, FieldElement] = {}


def HALF_ELEM(tower) -> FieldElement:
    h = _half_cache.get(id(tower))
    if h is None:
        h = tower.rational(Q(1, 2))
        _half_cache[id(tower)] = h
    return h
