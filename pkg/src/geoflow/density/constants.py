"""Explicit constants driving the visiting-time cascade and gap-decay bounds.

Polysquare surfaces (unit squares, badly approximable slope with digit
bound A, s squares):

    c1      = 1/(36 s^2 (A+2)^2)^(s+1)          shrink threshold per split
    delta_i = 1/(36 s^2 (A+2)^2)^i, i<=s+1      reverse-phase length floors
    c0      = ceil(max of the two budget sums)   visiting-time coefficient
              sum_a = sum_{i=0..s} 9*sqrt2*s^2*(A+2) / c1^i
              sum_b = sum_{i=0..s} 9*sqrt2*s^2*(A+2)*(36 s^2 (A+2)^2)^i / c1^s
    c2      = 1/((A+2) c0)                       endpoint separation factor
    c3      = 2 (A+2) c0^2                       gap-halving budget: after
              (A+2)c0 rounds of the (1-c2) reduction the gap is below 1/2 of
              its start, and each round costs at most 2 c0/x of extra time.

The octagon slope ledger replaces the Diophantine inequality with the
certified norm bound dist(form) > c5/N^5; its window coefficient is 30^6
and the cascade thresholds involve powers like (c5/60)^(6^16), which are
kept symbolic and compared through certified base-2 logarithm intervals
(they are far too small to materialize, and the comparisons they appear in
are decided by dozens of orders of magnitude).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..exactnum import Q, qify
from ..exactnum.cf import PreconditionError
from ..exactnum.diophantine import certified_form_constant
from ..exactnum.rationals import q_ceil, q_sqrt_ceil


class HypothesisViolated(RuntimeError):
    """A cascade exceeded a proven budget: an implementation bug, not math."""


def _ilog2_lo(q) -> int:
    return q.numerator.bit_length() - q.denominator.bit_length() - 1


def _ilog2_hi(q) -> int:
    return q.numerator.bit_length() - q.denominator.bit_length() + 1


def log2_bounds(x) -> tuple[int, int]:
    """Integer bounds l <= log2(x) <= h for a positive rational or element."""
    if hasattr(x, "enclosure"):
        p = 64
        while True:
            lo, hi = x.enclosure(p)
            if lo > 0:
                return _ilog2_lo(lo), _ilog2_hi(hi)
            p *= 2
    q = qify(x)
    if q <= 0:
        raise ValueError("log2_bounds needs a positive value")
    return _ilog2_lo(q), _ilog2_hi(q)


@dataclass(frozen=True)
class SymbolicPower:
    """Product of rational powers prod base_i^exp_i, too extreme to expand.

    Only certified log2 bounds are ever needed; exponents may be huge
    integers.
    """

    factors: tuple  # of (rational base > 0, int exponent)

    def log2_interval(self) -> tuple[int, int]:
        lo = hi = 0
        for base, exp in self.factors:
            blo, bhi = log2_bounds(base)
            if exp >= 0:
                lo += exp * blo
                hi += exp * bhi
            else:
                lo += exp * bhi
                hi += exp * blo
        return lo, hi

    def __repr__(self):
        return " * ".join(f"({b})^{e}" for b, e in self.factors) or "1"


def _leq_certified(left_log: tuple[int, int], right_log: tuple[int, int], what: str) -> bool:
    """left <= right via log intervals; raises only if truly undecidable."""
    if left_log[1] <= right_log[0]:
        return True
    if left_log[0] > right_log[1]:
        return False
    raise HypothesisViolated(f"log-certified comparison undecided: {what}")


@dataclass
class ConstantsLedger:
    """All constants used by the cascade and the gap-decay bookkeeping."""

    mode: str  # "polysquare" | "octagon"
    s: int  # number of vertical edges
    A: int | None = None
    c1: Q | None = None
    delta: tuple = ()  # delta[i-1] is the i-th reverse-phase floor
    c0: int | None = None
    c2: Q | None = None
    c3: int | None = None
    # octagon constants
    c4: int | None = None
    c5: Q | None = None
    window_coeff: int | None = None  # 30^6
    shrink_exponent: int | None = None  # 5^16
    c10: SymbolicPower | None = None
    c8: SymbolicPower | None = None
    c9: int | None = None
    c11: SymbolicPower | None = None
    c12: int | None = None
    c13: SymbolicPower | None = None
    halving_exponent: int | None = None
    notes: dict = field(default_factory=dict)

    # -- window/budget predicates, all exact or log-certified ---------------------

    @property
    def split_rounds_budget(self) -> int:
        # distinct vertical edges force a repetition by round s+1
        return self.s + 1

    def _window_coeff_poly(self) -> int:
        return 9 * self.s * self.s * (self.A + 2)

    def run_window_limit(self, x) -> int:
        """Shifts allowed before a split or a return must occur: [coeff/x]+1.

        x is the (exact) length of the interval being shifted; the octagon
        window divides by the certified norm constant and x^5 instead.
        """
        if self.mode == "polysquare":
            return (self._window_coeff_poly() / x).floor() + 1
        return (self.window_coeff / (self.c5 * x ** 5)).floor() + 1

    def is_collapse(self, x_new, x_prev) -> bool:
        """Did the kept piece shrink below the phase-switch threshold?"""
        if self.mode == "polysquare":
            return x_new < self.c1 * x_prev
        lhs = log2_bounds(x_new)
        c10lo, c10hi = self.c10.log2_interval()
        plo, phi = log2_bounds(x_prev)
        e = self.shrink_exponent
        rhs = (c10lo + e * plo, c10hi + e * phi)
        if lhs[0] > rhs[1]:
            return False
        if lhs[1] < rhs[0]:
            return True
        raise HypothesisViolated("collapse threshold comparison undecided")

    def reverse_floor_ok(self, i: int, y, x_r) -> bool:
        """i-th reverse-phase kept length obeys its proven floor."""
        if self.mode == "polysquare":
            return y >= self.delta[i - 1] * x_r
        base = SymbolicPower(((self.c5 / 60, 6 ** (2 * i)),))
        blo, bhi = base.log2_interval()
        plo, phi = log2_bounds(x_r)
        e = 5 ** (2 * i)
        rhs = (blo + e * plo, bhi + e * phi)
        return _leq_certified(rhs, log2_bounds(y), f"reverse floor i={i}")

    def visit_bound_ok(self, slope, t_h, x) -> bool:
        """|t*| <= c0/x (polysquare) or <= c8/x^c9 (octagon)."""
        if self.mode == "polysquare":
            return t_h * t_h * slope.one_plus_sq * x * x <= self.c0 * self.c0
        if t_h.is_zero():
            return True
        tlo, thi = log2_bounds(abs(t_h) * 2)  # sqrt(1+a^2) < 2
        c8lo, c8hi = self.c8.log2_interval()
        xlo, xhi = log2_bounds(x)
        rhs = (c8lo - self.c9 * xhi, c8hi - self.c9 * xlo)
        return _leq_certified((tlo, thi), rhs, "visiting-time bound")

    def endpoint_bound_ok(self, dist, x) -> bool:
        """Separation of the visit from either interval endpoint."""
        if self.mode == "polysquare":
            return dist >= self.c2 * x
        c11lo, c11hi = self.c11.log2_interval()
        xlo, xhi = log2_bounds(x)
        rhs = (c11lo + self.c12 * xlo, c11hi + self.c12 * xhi)
        return _leq_certified(rhs, log2_bounds(dist), "endpoint separation")


def constants(A: int, s: int) -> ConstantsLedger:
    """Polysquare ledger for digit bound A and s unit squares, all exact."""
    if A < 1 or s < 1:
        raise PreconditionError("need A >= 1 and s >= 1")
    base = 36 * s * s * (A + 2) * (A + 2)
    c1 = Q(1, base ** (s + 1))
    delta = tuple(Q(1, base ** i) for i in range(1, s + 2))
    lead = 9 * s * s * (A + 2)
    sum_a = sum((lead * Q(base ** (s + 1)) ** i for i in range(s + 1)), Q(0))
    sum_b = sum(
        (lead * Q(base) ** i * Q(base ** (s + 1)) ** s for i in range(s + 1)), Q(0)
    )
    big = max(sum_a, sum_b)
    c0 = q_sqrt_ceil(2 * big * big)  # ceil(big * sqrt2)
    c2 = Q(1, (A + 2) * c0)
    c3 = 2 * (A + 2) * c0 * c0
    return ConstantsLedger(
        mode="polysquare",
        s=s,
        A=A,
        c1=c1,
        delta=delta,
        c0=c0,
        c2=c2,
        c3=c3,
        notes={
            "c0": "ceil(sqrt2 * max of the forward/reverse budget sums)",
            "c3": "(A+2)*c0 reduction rounds, each costing at most 2*c0/x",
        },
    )


def octagon_ledger(alpha, beta) -> ConstantsLedger:
    """Ledger for the octagon surface with the given algebraic slope data.

    c5 is the certified uniform constant of the norm bound.  The remaining
    constants follow the cascade recursion: with the shrink exponent 5^16
    and threshold c10 = (c5/60)^(6^16), at most 8 forward and 8 reverse
    rounds give a time bound c8/x^c9 with c9 = 5^128 and
    c8 = (60/c5)^(6^128) as a (vastly conservative) envelope; the endpoint
    separation follows by applying the norm bound to at most that many
    shifts, giving c11 = c5*(c8*2)^-5 and c12 = 5*c9; a halving of the
    maximum gap needs about x^(1-c12)/c11 reduction rounds, for a budget
    exponent c9 + c12 - 1.  These are upper-bound parameters for assertion
    purposes only, never ground truth.
    """
    cert = certified_form_constant(alpha, beta)
    c5 = cert.c
    if not (c5 > 0 and c5 < 1):
        raise PreconditionError("certified constant must lie in (0,1)")
    c9 = 5 ** 128
    c12 = 5 * c9
    return ConstantsLedger(
        mode="octagon",
        s=7,
        c4=cert.c4,
        c5=c5,
        window_coeff=30 ** 6,
        shrink_exponent=5 ** 16,
        c10=SymbolicPower(((c5 / 60, 6 ** 16),)),
        c8=SymbolicPower(((60 / c5, 6 ** 128),)),
        c9=c9,
        c11=SymbolicPower(((c5, 1), (60 / c5, -5 * 6 ** 128), (Q(1, 2), 5))),
        c12=c12,
        c13=SymbolicPower(((60 / c5, 2 * 6 ** 128),)),
        halving_exponent=c9 + c12 - 1,
        notes={
            "c5": "1/(c4 * K1^(degree-1)) from multiplication-matrix norms",
            "exponent": "degree-1 rule, an inference beyond degree 6",
            "halving_exponent": "printed-source discrepancy: exponent kept as a parameter",
        },
    )
