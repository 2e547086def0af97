"""Norm-based lower bounds for linear forms n1*a + n2*b*a - n3*b over a tower.

The engine behind the octagon slope analysis: if the form (after clearing
denominators by the integer c4) is a nonzero algebraic integer gamma, the
product of its conjugates is a nonzero rational integer, so

    dist(form, Z) = |gamma_1| / c4 >= 1 / (c4 * |gamma_2 ... gamma_d|).

Conjugate products are bounded through the characteristic polynomial of the
multiplication-by-gamma matrix; no complex embeddings are used anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cf import PreconditionError
from .fields import FieldElement, multiplication_matrix
from .rationals import (
    ONE,
    Q,
    ZERO,
    iroot_floor,
    lcm_denominators,
    q_ceil,
    q_floor,
    qify,
)


class DegenerateFormError(ValueError):
    """The linear form collapsed to an integer (rationally dependent data)."""


def field_norm(x: FieldElement) -> Q:
    """Determinant of the multiplication-by-x matrix; 0 iff x == 0.

    Equals the product of x's conjugates over all real/complex embeddings,
    computed without leaving rational arithmetic.
    """
    if x.is_zero():
        return ZERO
    if x.is_rational():
        return x.coords[0] ** x.tower.degree
    return _det_q(multiplication_matrix(x))


def _det_q(m) -> Q:
    d = len(m)
    a = [row[:] for row in m]
    det = ONE
    for col in range(d):
        piv = next((r for r in range(col, d) if a[r][col] != 0), None)
        if piv is None:
            return ZERO
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        inv = ONE / a[col][col]
        for r in range(col + 1, d):
            if a[r][col] != 0:
                f = a[r][col] * inv
                for c in range(col, d):
                    a[r][c] -= f * a[col][c]
    return det


def char_poly(x: FieldElement) -> tuple[Q, ...]:
    """Monic characteristic polynomial of multiplication-by-x, ascending coefficients.

    Faddeev-LeVerrier over exact rationals; the roots are the conjugates of
    x, each repeated degree/deg(x) times.
    """
    t = x.tower
    d = t.degree
    m = multiplication_matrix(x)
    coeffs = [ZERO] * (d + 1)
    coeffs[d] = ONE
    n = [[ONE if i == j else ZERO for j in range(d)] for i in range(d)]  # N_0 = I
    for k in range(1, d + 1):
        mk = _matmul_q(m, n)
        ck = -sum(mk[i][i] for i in range(d)) / k
        coeffs[d - k] = ck
        if k < d:
            n = [
                [mk[i][j] + (ck if i == j else ZERO) for j in range(d)]
                for i in range(d)
            ]
    return tuple(coeffs)


def _matmul_q(a, b):
    d = len(a)
    out = [[ZERO] * d for _ in range(d)]
    for i in range(d):
        ai = a[i]
        oi = out[i]
        for k in range(d):
            v = ai[k]
            if v == 0:
                continue
            bk = b[k]
            for j in range(d):
                if bk[j] != 0:
                    oi[j] += v * bk[j]
    return out


def _root_bound(coeffs_ascending) -> int:
    """Integer upper bound on |roots| of a monic polynomial (Fujiwara-style).

    All roots z satisfy |z| <= 2 * max_k |a_{d-k}|^(1/k); returned as an
    integer ceiling, at least 1.
    """
    d = len(coeffs_ascending) - 1
    best = 1
    for k in range(1, d + 1):
        a = coeffs_ascending[d - k]
        num, den = abs(a.numerator), a.denominator
        if num == 0:
            continue
        # ceil((num/den)^(1/k)) <= ceil(ceil(num/den)^(1/k))
        mag = -((-num) // den)
        r = iroot_floor(mag, k)
        if r ** k < mag:
            r += 1
        best = max(best, r)
    return 2 * best


def denominator_clearing_constant(*elements: FieldElement) -> int:
    """Least D such that D*x has integer coordinates for each given x.

    Monomials of the basis are algebraic integers, so D*x (and D*(x - m) for
    any integer m) is an algebraic integer.  No ring-of-integers index is
    needed: the norm argument only requires membership in the maximal order.
    """
    qs = [c for x in elements for c in x.coords]
    return lcm_denominators(qs)


@dataclass
class LinearFormBoundDetails:
    n1: int
    n2: int
    n3: int
    c4: int
    root_bound: int
    char_poly: tuple
    bound: Q  # certified: bound <= dist(form, Z)
    nearest: int


def _form_value(n1: int, n2: int, n3: int, alpha: FieldElement, beta: FieldElement):
    return n1 * alpha + n2 * beta * alpha - n3 * beta


def linear_form_bound_details(
    n1: int, n2: int, n3: int, alpha: FieldElement, beta: FieldElement
) -> LinearFormBoundDetails:
    if n1 * n1 + n2 * n2 < 1:
        raise PreconditionError("need n1^2 + n2^2 >= 1")
    if alpha.tower is not beta.tower:
        raise ValueError("alpha and beta must share a tower")
    v = _form_value(n1, n2, n3, alpha, beta)
    m = v.nearest_int()
    if (v - m).is_zero():
        raise DegenerateFormError(f"form at ({n1},{n2},{n3}) is the integer {m}")
    c4 = denominator_clearing_constant(alpha, beta * alpha, beta)
    gamma = (v - m) * c4
    chi = char_poly(gamma)
    assert all(c.denominator == 1 for c in chi), "cleared form must be an algebraic integer"
    rho = _root_bound(chi)
    d = alpha.tower.degree
    bound = Q(1, c4 * rho ** (d - 1))
    return LinearFormBoundDetails(
        n1=n1, n2=n2, n3=n3, c4=c4, root_bound=rho, char_poly=chi, bound=bound, nearest=m
    )


def linear_form_lower_bound(
    n1: int, n2: int, n3: int, alpha: FieldElement, beta: FieldElement
) -> FieldElement:
    """Certified positive lower bound for dist(n1*a + n2*b*a - n3*b, Z)."""
    details = linear_form_bound_details(n1, n2, n3, alpha, beta)
    return alpha.tower.rational(details.bound)


@dataclass
class CertifiedFormConstant:
    """Uniform constant: dist(form, Z) > c / N^exponent for all admissible triples.

    Derived from infinity-norms of the three fixed multiplication matrices,
    so it is certified but far from tight.  The exponent degree-1 follows
    the same conjugate-count argument for any tower (an inference for
    towers beyond degree 6; see the project notes).
    """

    c: Q
    exponent: int
    c4: int
    matrix_norm_sum: int


def certified_form_constant(alpha: FieldElement, beta: FieldElement) -> CertifiedFormConstant:
    t = alpha.tower
    d = t.degree
    c4 = denominator_clearing_constant(alpha, beta * alpha, beta)
    mats = [multiplication_matrix(x * c4) for x in (alpha, beta * alpha, beta)]
    norm_sum = 0
    for m in mats:
        norm_sum += max(sum(q_ceil(abs(v)) for v in row) for row in m)
    # |m| <= N(|a| + |ba| + |b|) + 1/2, so ||M_gamma||_inf <= N * K1 with:
    u_sum = ZERO
    for x in (alpha, beta * alpha, beta):
        u_sum += abs(x).enclosure(32)[1]
    k1 = norm_sum + c4 * q_ceil(u_sum) + c4
    return CertifiedFormConstant(
        c=Q(1, c4 * k1 ** (d - 1)), exponent=d - 1, c4=c4, matrix_norm_sum=norm_sum
    )


# -- exhaustive search over a box of coefficients -----------------------------

_ENCLOSURE_BITS = 52


def _scaled_bounds(x: FieldElement, p: int) -> tuple[int, int]:
    lo, hi = x.enclosure(p + 8)
    return q_floor(lo * (1 << p)), q_ceil(hi * (1 << p))


def _canonical_triples(n_max: int):
    """Half of the coefficient box (forms come in +/- pairs with equal dist)."""
    rng = np.arange(-n_max, n_max + 1, dtype=np.int64)
    n1, n2, n3 = np.meshgrid(rng, rng, rng, indexing="ij")
    n1, n2, n3 = n1.ravel(), n2.ravel(), n3.ravel()
    keep = (n1 > 0) | ((n1 == 0) & (n2 > 0))
    return n1[keep], n2[keep], n3[keep]


def _batch_form_enclosures(alpha, beta, n1, n2, n3, p=_ENCLOSURE_BITS):
    """Certified scaled enclosures of each form value and its nearest integer.

    Returns (m, w_lo, w_hi, ambiguous): integers scaled by 2^p with
    w_lo/2^p <= |form - m| <= w_hi/2^p wherever ``ambiguous`` is False.
    """
    vals = (alpha, beta * alpha, beta)
    bounds = [_scaled_bounds(x, p) for x in vals]
    v_lo = np.zeros(len(n1), dtype=np.int64)
    v_hi = np.zeros(len(n1), dtype=np.int64)
    for n, (lo, hi), sign in zip((n1, n2, n3), bounds, (1, 1, -1)):
        ns = sign * n
        v_lo += np.where(ns >= 0, ns * lo, ns * hi)
        v_hi += np.where(ns >= 0, ns * hi, ns * lo)
    mid = (v_lo + v_hi) >> 1
    m = (mid + (1 << (p - 1))) >> p  # nearest integer of the midpoint
    w_lo = v_lo - (m << p)
    w_hi = v_hi - (m << p)
    aw_lo = np.where(w_lo >= 0, w_lo, np.where(w_hi <= 0, -w_hi, 0))
    aw_hi = np.maximum(np.abs(w_lo), np.abs(w_hi))
    half = 1 << (p - 1)
    ambiguous = (w_hi >= half) | (w_lo <= -half) | ((w_lo <= 0) & (w_hi >= 0))
    return m, aw_lo, aw_hi, ambiguous


@dataclass
class EmpiricalFormMinimum:
    n_max: int
    value_upper: Q  # rational upper approximation of the overall minimum
    value: FieldElement  # exact overall min of maxabs^5 * dist(form, Z)
    argmin: tuple[int, int, int]
    per_n: list  # (N, float shadow of the running minimum)
    exponent: int


def empirical_c5(alpha: FieldElement, beta: FieldElement, n_max: int) -> EmpiricalFormMinimum:
    """Brute-force min of N^e * dist(form, Z) over the coefficient box.

    e = degree - 1.  Each triple is weighted by its own max|n_i|^e, which
    makes the running minimum non-increasing in n_max by set inclusion.
    This is the oracle the certified bound must stay below.
    """
    if n_max < 1:
        raise PreconditionError("n_max >= 1")
    if alpha.is_rational() and beta.is_rational():
        raise DegenerateFormError("field degenerate: both slopes rational")
    t = alpha.tower
    e = t.degree - 1
    n1, n2, n3 = _canonical_triples(n_max)
    m, aw_lo, aw_hi, ambiguous = _batch_form_enclosures(alpha, beta, n1, n2, n3)
    if ambiguous.any():
        for idx in np.nonzero(ambiguous)[0]:
            v = _form_value(int(n1[idx]), int(n2[idx]), int(n3[idx]), alpha, beta)
            mi = v.nearest_int()
            if (v - mi).is_zero():
                raise DegenerateFormError(
                    f"field degenerate: form at ({n1[idx]},{n2[idx]},{n3[idx]}) is an integer"
                )
        # fall through: ambiguous rows resolved exactly below if they matter
    maxabs = np.maximum(np.maximum(np.abs(n1), np.abs(n2)), np.abs(n3))
    weight = maxabs.astype(np.float64) ** e
    scale = float(1 << _ENCLOSURE_BITS)
    cand_lo = weight * (aw_lo / scale)
    cand_hi = weight * (aw_hi / scale)
    cand_lo[ambiguous] = 0.0

    # per-N running minimum (float shadows for reporting)
    per_n = []
    running = np.inf
    order = np.argsort(maxabs, kind="stable")
    sorted_max = maxabs[order]
    sorted_hi = cand_hi[order]
    starts = np.searchsorted(sorted_max, np.arange(1, n_max + 1), side="left")
    ends = np.searchsorted(sorted_max, np.arange(1, n_max + 1), side="right")
    for i, n in enumerate(range(1, n_max + 1)):
        if ends[i] > starts[i]:
            running = min(running, float(sorted_hi[starts[i] : ends[i]].min()))
        per_n.append((n, running))

    # exact verification of the winner among near-minimal candidates
    global_min_hi = cand_hi.min()
    shortlist = np.nonzero((cand_lo <= global_min_hi) | ambiguous)[0]
    best_val = None
    best_triple = None
    for idx in shortlist:
        trip = (int(n1[idx]), int(n2[idx]), int(n3[idx]))
        v = _form_value(*trip, alpha, beta)
        mi = v.nearest_int()
        dist = abs(v - mi)
        if dist.is_zero():
            raise DegenerateFormError(f"field degenerate: integer form at {trip}")
        val = (int(maxabs[idx]) ** e) * dist
        if best_val is None or val < best_val:
            best_val, best_triple = val, trip
    hi = best_val.enclosure(64)[1]
    return EmpiricalFormMinimum(
        n_max=n_max,
        value_upper=hi,
        value=best_val,
        argmin=best_triple,
        per_n=per_n,
        exponent=e,
    )


@dataclass
class SoundnessSweep:
    n_max: int
    checked: int
    exact_fallbacks: int
    min_margin: float  # min over triples of dist/bound (should stay >= 1)


def _char_poly_int(m: list[list[int]]) -> list[int]:
    """Exact characteristic polynomial of a small integer matrix (ascending).

    det(xI - M) interpolated at the integer nodes -d/2..d/2; pure integer
    arithmetic so it is overflow-free for any size matrix.
    """
    d = len(m)
    nodes = list(range(-(d // 2), d - (d // 2) + 1))
    vals = []
    for x in nodes:
        a = [[(x if i == j else 0) - m[i][j] for j in range(d)] for i in range(d)]
        vals.append(_det_int(a))
    w_num, w_den = _vandermonde_inverse(tuple(nodes))
    coeffs = []
    for k in range(d + 1):
        s = sum(w_num[k][j] * vals[j] for j in range(d + 1))
        q, r = divmod(s, w_den)
        assert r == 0
        coeffs.append(q)
    return coeffs


def _det_int(a: list[list[int]]) -> int:
    """Bareiss fraction-free determinant of an integer matrix (destroys a)."""
    d = len(a)
    sign = 1
    prev = 1
    for k in range(d - 1):
        if a[k][k] == 0:
            piv = next((r for r in range(k + 1, d) if r is not None and a[r][k] != 0), None)
            if piv is None:
                return 0
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        akk = a[k][k]
        for i in range(k + 1, d):
            aik = a[i][k]
            row = a[i]
            rk = a[k]
            for j in range(k + 1, d):
                row[j] = (row[j] * akk - aik * rk[j]) // prev
            row[k] = 0
        prev = akk
    return sign * a[d - 1][d - 1]


_vander_cache: dict[tuple, tuple] = {}


def _vandermonde_inverse(nodes: tuple[int, ...]):
    """Exact inverse of the Vandermonde system, as (integer matrix, denominator)."""
    cached = _vander_cache.get(nodes)
    if cached is not None:
        return cached
    from fractions import Fraction

    n = len(nodes)
    rows = [[Fraction(x) ** k for k in range(n)] for x in nodes]
    inv = []
    for col in range(n):
        rhs = [Fraction(1 if r == col else 0) for r in range(n)]
        aug = [row[:] + [rhs[r]] for r, row in enumerate(rows)]
        for c in range(n):
            piv = next(r for r in range(c, n) if aug[r][c] != 0)
            aug[c], aug[piv] = aug[piv], aug[c]
            pv = aug[c][c]
            aug[c] = [v / pv for v in aug[c]]
            for r in range(n):
                if r != c and aug[r][c] != 0:
                    f = aug[r][c]
                    aug[r] = [v - f * w for v, w in zip(aug[r], aug[c])]
        inv.append([aug[r][n] for r in range(n)])
    # inv[col][row] holds V^{-1}[row][col]; emit W[k][j] = V^{-1}[k][j]
    den = 1
    for col in inv:
        for v in col:
            den = den * v.denominator // __import__("math").gcd(den, v.denominator)
    w_num = [[int(inv[j][k] * den) for j in range(n)] for k in range(n)]
    result = (w_num, den)
    _vander_cache[nodes] = result
    return result


def linear_form_soundness_sweep(
    alpha: FieldElement, beta: FieldElement, n_max: int
) -> SoundnessSweep:
    """Verify bound <= dist(form, Z) for every triple with max|n_i| <= n_max.

    Exhaustive and exact: enclosures certify each comparison, falling back
    to full field arithmetic when an enclosure is too tight to decide.
    Uses the same characteristic-polynomial bound as the per-triple API
    (cross-checked in the tests).
    """
    t = alpha.tower
    d = t.degree
    c4 = denominator_clearing_constant(alpha, beta * alpha, beta)
    base_mats = [
        [[int(v) for v in row] for row in multiplication_matrix(x * c4)]
        for x in (alpha, beta * alpha, beta)
    ]
    n1, n2, n3 = _canonical_triples(n_max)
    m_arr, aw_lo, _aw_hi, ambiguous = _batch_form_enclosures(alpha, beta, n1, n2, n3)
    p = _ENCLOSURE_BITS
    a1, a2, a3 = base_mats
    checked = 0
    fallbacks = 0
    min_margin = float("inf")
    for idx in range(len(n1)):
        k1, k2, k3, mm = int(n1[idx]), int(n2[idx]), int(n3[idx]), int(m_arr[idx])
        cm = c4 * mm
        mat = [
            [
                k1 * a1[i][j] + k2 * a2[i][j] - k3 * a3[i][j] - (cm if i == j else 0)
                for j in range(d)
            ]
            for i in range(d)
        ]
        chi = _char_poly_int(mat)
        rho = _root_bound([Q(c) for c in chi])
        denom = c4 * rho ** (d - 1)  # bound = 1/denom
        if ambiguous[idx]:
            fallbacks += 1
            v = _form_value(k1, k2, k3, alpha, beta)
            dist = abs(v - v.nearest_int())
            if dist.is_zero():
                raise DegenerateFormError(f"integer form at ({k1},{k2},{k3})")
            if not (dist * denom >= 1):
                raise AssertionError(f"bound unsound at ({k1},{k2},{k3})")
            margin = float(dist) * denom
        else:
            lo = int(aw_lo[idx])
            # bound <= dist follows from 2^p <= denom * dist_lo_scaled
            if denom * lo < (1 << p):
                fallbacks += 1
                v = _form_value(k1, k2, k3, alpha, beta)
                dist = abs(v - v.nearest_int())
                if not (dist * denom >= 1):
                    raise AssertionError(f"bound unsound at ({k1},{k2},{k3})")
                margin = float(dist) * denom
            else:
                margin = (lo / float(1 << p)) * denom
        min_margin = min(min_margin, margin)
        checked += 1
    return SoundnessSweep(
        n_max=n_max, checked=checked, exact_fallbacks=fallbacks, min_margin=min_margin
    )
