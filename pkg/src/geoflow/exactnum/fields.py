"""Real algebraic tower fields with exact arithmetic and certified signs.

A tower is Q adjoined a sequence of real radicals (square or cube roots of
positive integers), e.g. Q(sqrt2) or Q(sqrt2, cbrt3).  Elements are stored
as rational coordinate vectors over the monomial basis (products of
generator powers below their exponents).  Every operation is exact; order
comparisons are decided by interval refinement with rational endpoints,
which terminates because a nonzero element is bounded away from zero.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .rationals import (
    BACKEND,
    ONE,
    Q,
    ZERO,
    HALF,
    iroot_floor,
    is_perfect_power,
    is_rational,
    q_floor,
    qify,
)

if BACKEND == "gmpy2":
    from gmpy2 import iroot as _gmpy_iroot  # type: ignore
else:
    _gmpy_iroot = None


class TowerError(ValueError):
    """Raised for invalid tower specifications (reducible relations etc.)."""


@dataclass(frozen=True)
class Generator:
    name: str
    exponent: int  # 2 or 3
    radicand: int  # positive integer; the generator is the positive real root

    def __post_init__(self):
        if self.exponent not in (2, 3):
            raise TowerError(f"generator exponent must be 2 or 3, got {self.exponent}")
        if self.radicand < 2:
            raise TowerError(f"radicand must be an integer >= 2, got {self.radicand}")
        if not self.name.isidentifier():
            raise TowerError(f"bad generator name {self.name!r}")


def _check_radical_independence(gens: tuple[Generator, ...]) -> None:
    """Reject towers where some x^e - radicand is reducible over the field below.

    For real radicals of positive integers this reduces to a multiplicative
    test: a new square root must not equal a rational times a product of the
    earlier square-root generators, and a new cube root must not equal a
    rational times a product of powers of the earlier cube-root generators.
    (A square root lying in the tower must lie in its multiquadratic part
    since the cube-root layers have odd degree, and symmetrically for cube
    roots; inside those parts membership is the subset-product test.)
    """
    squares: list[int] = []
    cubes: list[int] = []
    for g in gens:
        if g.exponent == 2:
            for r in range(len(squares) + 1):
                for combo in itertools.combinations(squares, r):
                    prod = g.radicand
                    for c in combo:
                        prod *= c
                    if is_perfect_power(prod, 2):
                        raise TowerError(
                            f"x^2 - {g.radicand} is reducible over the tower below {g.name!r}"
                        )
            squares.append(g.radicand)
        else:
            for exps in itertools.product(range(3), repeat=len(cubes)):
                prod = g.radicand
                for c, e in zip(cubes, exps):
                    prod *= c ** e
                if is_perfect_power(prod, 3):
                    raise TowerError(
                        f"x^3 - {g.radicand} is reducible over the tower below {g.name!r}"
                    )
            cubes.append(g.radicand)


_tower_cache: dict[tuple, "TowerSpec"] = {}


class TowerSpec:
    """Immutable description of a tower field plus precomputed multiplication tables.

    The monomial basis is ordered lexicographically by exponent vector with
    the first generator most significant:  for Q(r, c) with r^2=2, c^3=3 the
    basis reads 1, c, c^2, r, r*c, r*c^2.
    """

    def __init__(self, generators):
        gens = tuple(
            g if isinstance(g, Generator) else Generator(*g) for g in generators
        )
        names = [g.name for g in gens]
        if len(set(names)) != len(names):
            raise TowerError(f"duplicate generator names in {names}")
        _check_radical_independence(gens)
        self.generators = gens
        self.degree = 1
        for g in gens:
            self.degree *= g.exponent
        self._exps = tuple(
            itertools.product(*(range(g.exponent) for g in gens))
        )  # lex order, first generator most significant
        self._exp_index = {e: i for i, e in enumerate(self._exps)}
        d = self.degree
        # basis_i * basis_j = scale[i][j] * basis_{target[i][j]}, scale an integer
        self._mul_target = [[0] * d for _ in range(d)]
        self._mul_scale = [[1] * d for _ in range(d)]
        for i in range(d):
            for j in range(d):
                scale = 1
                reduced = []
                for g, a, b in zip(gens, self._exps[i], self._exps[j]):
                    quo, rem = divmod(a + b, g.exponent)
                    scale *= g.radicand ** quo
                    reduced.append(rem)
                self._mul_target[i][j] = self._exp_index[tuple(reduced)]
                self._mul_scale[i][j] = scale
        self._monomial_cache: dict[int, list[tuple[Q, Q]]] = {}
        self._monomial_floats: tuple[float, ...] | None = None
        self.zero = FieldElement(self, (ZERO,) * d)
        self.one = FieldElement(self, (ONE,) + (ZERO,) * (d - 1))

    def monomial_floats(self) -> tuple[float, ...]:
        if self._monomial_floats is None:
            self._monomial_floats = tuple(
                float((lo + hi) / 2) for lo, hi in self._monomials(64)
            )
        return self._monomial_floats

    def __reduce__(self):
        return (tower, (tuple((g.name, g.exponent, g.radicand) for g in self.generators),))

    def __repr__(self):
        gens = ", ".join(f"{g.name}^{g.exponent}={g.radicand}" for g in self.generators)
        return f"TowerSpec({gens})" if gens else "TowerSpec(Q)"

    # -- construction helpers -------------------------------------------------

    def rational(self, q) -> "FieldElement":
        coords = [ZERO] * self.degree
        coords[0] = qify(q)
        return FieldElement(self, tuple(coords))

    def generator(self, name: str) -> "FieldElement":
        for k, g in enumerate(self.generators):
            if g.name == name:
                exp = tuple(1 if i == k else 0 for i in range(len(self.generators)))
                coords = [ZERO] * self.degree
                coords[self._exp_index[exp]] = ONE
                return FieldElement(self, tuple(coords))
        raise KeyError(f"no generator named {name!r}")

    def element(self, coords) -> "FieldElement":
        coords = tuple(qify(c) for c in coords)
        if len(coords) != self.degree:
            raise ValueError(f"need {self.degree} coordinates, got {len(coords)}")
        return FieldElement(self, coords)

    def monomial_name(self, index: int) -> str:
        # powers spelled as repeated products so the net grammar re-parses them
        parts = []
        for g, e in zip(self.generators, self._exps[index]):
            parts.extend([g.name] * e)
        return "*".join(parts)  # empty for the constant monomial

    # -- certified enclosures -------------------------------------------------

    def _monomials(self, p: int) -> list[tuple[Q, Q]]:
        """Rational enclosures of every basis monomial at dyadic precision 2^-p."""
        cached = self._monomial_cache.get(p)
        if cached is not None:
            return cached
        gen_bounds = []
        for g in self.generators:
            n = g.radicand << (g.exponent * p)
            if _gmpy_iroot is not None:
                r, exact = _gmpy_iroot(n, g.exponent)
                r = int(r)
            else:
                r = iroot_floor(n, g.exponent)
                exact = r ** g.exponent == n
            scale = 1 << p
            gen_bounds.append((Q(r, scale), Q(r if exact else r + 1, scale)))
        out = []
        for exp in self._exps:
            lo, hi = ONE, ONE
            for (glo, ghi), e in zip(gen_bounds, exp):
                for _ in range(e):
                    lo, hi = lo * glo, hi * ghi  # positive intervals
            out.append((lo, hi))
        self._monomial_cache[p] = out
        return out


def tower(generators) -> TowerSpec:
    """Cached TowerSpec constructor; specs compare by identity after this."""
    key = tuple(
        (g.name, g.exponent, g.radicand) if isinstance(g, Generator) else tuple(g)
        for g in generators
    )
    spec = _tower_cache.get(key)
    if spec is None:
        spec = TowerSpec(key)
        _tower_cache[key] = spec
    return spec


_PREC_LADDER = (32, 64, 128, 256, 512, 1024, 2048, 4096, 8192)


class FieldElement:
    """An exact element of a tower field (immutable)."""

    __slots__ = ("tower", "coords", "_float")

    def __init__(self, tower: TowerSpec, coords: tuple):
        object.__setattr__(self, "tower", tower)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "_float", None)

    def __setattr__(self, *a):
        raise AttributeError("FieldElement is immutable")

    # -- plumbing -------------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.tower is not self.tower:
                raise ValueError("mixed towers in arithmetic")
            return other
        if is_rational(other):
            return self.tower.rational(other)
        return None

    def __repr__(self):
        return f"<{expr_text(self)}>"

    def __hash__(self):
        return hash((id(self.tower), self.coords))

    def __bool__(self):
        return not self.is_zero()

    # -- exact predicates -----------------------------------------------------

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coords[1:])

    def as_rational(self) -> Q:
        if not self.is_rational():
            raise ValueError(f"{self!r} is irrational")
        return self.coords[0]

    # -- ring/field operations --------------------------------------------------

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return FieldElement(self.tower, tuple(a + b for a, b in zip(self.coords, o.coords)))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return FieldElement(self.tower, tuple(a - b for a, b in zip(self.coords, o.coords)))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self):
        return FieldElement(self.tower, tuple(-a for a in self.coords))

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        t = self.tower
        target, scale = t._mul_target, t._mul_scale
        acc = [ZERO] * t.degree
        for i, a in enumerate(self.coords):
            if a == 0:
                continue
            ti, si = target[i], scale[i]
            for j, b in enumerate(o.coords):
                if b == 0:
                    continue
                acc[ti[j]] += a * b * si[j]
        return FieldElement(t, tuple(acc))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return (self ** (-n)).inverse()
        out = self.tower.one
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def inverse(self) -> "FieldElement":
        if self.is_zero():
            raise ZeroDivisionError("field element is zero")
        if self.is_rational():
            return self.tower.rational(ONE / self.coords[0])
        d = self.tower.degree
        # solve M v = e0 where M is the multiplication-by-self matrix
        m = multiplication_matrix(self)
        rhs = [ONE] + [ZERO] * (d - 1)
        v = _solve_linear(m, rhs)
        return FieldElement(self.tower, tuple(v))

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.is_rational():
            q = o.as_rational()
            if q == 0:
                raise ZeroDivisionError("division by zero")
            return FieldElement(self.tower, tuple(a / q for a in self.coords))
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- exact order ------------------------------------------------------------

    def enclosure(self, p: int) -> tuple[Q, Q]:
        """Certified rational interval containing the value, width O(2^-p)."""
        lo = hi = ZERO
        for c, (mlo, mhi) in zip(self.coords, self.tower._monomials(p)):
            if c > 0:
                lo += c * mlo
                hi += c * mhi
            elif c < 0:
                lo += c * mhi
                hi += c * mlo
        return lo, hi

    def sign(self) -> int:
        if self.is_rational():
            q = self.coords[0]
            return (q > 0) - (q < 0)
        fast = self._sign_quadratic()
        if fast is not None:
            return fast
        for p in _PREC_LADDER:
            lo, hi = self.enclosure(p)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
        raise RuntimeError(f"sign refinement exhausted for {self!r}")

    def _sign_quadratic(self):
        """Closed-form sign for a + b*sqrt(d) shapes (no interval refinement)."""
        t = self.tower
        nz = [i for i, c in enumerate(self.coords) if i > 0 and c != 0]
        if len(nz) != 1:
            return None
        i = nz[0]
        if t._mul_target[i][i] != 0:
            return None  # monomial^2 is not rational
        d = t._mul_scale[i][i]
        a, b = self.coords[0], self.coords[i]
        if a == 0:
            return 1 if b > 0 else -1
        if (a > 0) == (b > 0):
            return 1 if a > 0 else -1
        # opposite signs: compare a^2 with b^2 d; equality is impossible in a field
        lhs, rhs = a * a, b * b * d
        if a > 0:
            return 1 if lhs > rhs else -1
        return -1 if lhs > rhs else 1

    def _cmp(self, other) -> int:
        o = self._coerce(other)
        if o is None:
            raise TypeError(f"cannot compare FieldElement with {other!r}")
        return (self - o).sign()

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.coords == o.coords

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    # -- certified approximation -------------------------------------------------

    def approx(self, eps) -> Q:
        """A rational r with |self - r| < eps, certified by interval arithmetic."""
        eps = qify(eps)
        if eps <= 0:
            raise ValueError("eps must be positive")
        if self.is_rational():
            return self.coords[0]
        p = 32
        while True:
            lo, hi = self.enclosure(p)
            if hi - lo < eps:
                return (lo + hi) / 2
            p *= 2

    def __float__(self):
        """Fast cached shadow: exact within a few ulps of the coordinate scale.

        Good for display, prefilters and guard bands; anything needing a
        certified error uses approx()/enclosure() instead.
        """
        f = self._float
        if f is None:
            f = 0.0
            for c, m in zip(self.coords, self.tower.monomial_floats()):
                if c != 0:
                    f += float(c) * m
            object.__setattr__(self, "_float", f)
        return f

    def floor(self) -> int:
        if self.is_rational():
            return q_floor(self.coords[0])
        p = 32
        while True:
            lo, hi = self.enclosure(p)
            flo, fhi = q_floor(lo), q_floor(hi)
            if flo == fhi:
                return flo
            p *= 2
            # terminates: an irrational element is never an integer

    def nearest_int(self) -> int:
        """An integer minimizing |self - m| (ties broken upward)."""
        if self.is_rational():
            return q_floor(self.coords[0] + HALF)
        r = self.approx(Q(1, 4))
        m0 = q_floor(r + HALF)
        best, best_dist = None, None
        for m in (m0 - 1, m0, m0 + 1):
            d = abs(self - m)
            if best is None or d < best_dist:
                best, best_dist = m, d
        return best


def multiplication_matrix(x: FieldElement) -> list[list[Q]]:
    """Matrix of y -> x*y over the monomial basis; column j is x * basis_j."""
    t = x.tower
    d = t.degree
    m = [[ZERO] * d for _ in range(d)]
    for j in range(d):
        basis_j = [ZERO] * d
        basis_j[j] = ONE
        col = x * FieldElement(t, tuple(basis_j))
        for i in range(d):
            m[i][j] = col.coords[i]
    return m


def _solve_linear(m, rhs):
    """Exact Gaussian elimination; m is destroyed. Raises on singular systems."""
    d = len(rhs)
    a = [row[:] + [r] for row, r in zip(m, rhs)]
    for col in range(d):
        piv = next((r for r in range(col, d) if a[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        a[col], a[piv] = a[piv], a[col]
        inv = ONE / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(d):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
    return [a[r][d] for r in range(d)]


def dist_nearest_int(x: FieldElement) -> FieldElement:
    """Distance from x to the nearest integer, as an exact element in [0, 1/2]."""
    m = x.nearest_int()
    return abs(x - m)


def approx(x: FieldElement, eps) -> Q:
    return x.approx(eps)


def sign(x: FieldElement) -> int:
    return x.sign()


# -- canonical text ----------------------------------------------------------


def _q_text(q) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def expr_text(x: FieldElement) -> str:
    """Canonical expression over the generator names, re-parseable by the net grammar."""
    terms = []
    for i, c in enumerate(x.coords):
        if c == 0:
            continue
        mono = x.tower.monomial_name(i)
        if not mono:
            terms.append((c < 0, _q_text(abs(c))))
        elif abs(c) == 1:
            terms.append((c < 0, mono))
        else:
            terms.append((c < 0, f"{_q_text(abs(c))}*{mono}"))
    if not terms:
        return "0"
    neg0, body0 = terms[0]
    out = ("-" if neg0 else "") + body0
    for neg, body in terms[1:]:
        out += (" - " if neg else " + ") + body
    return out


def decimal_text(x: FieldElement, digits: int = 15) -> str:
    """Decimal shadow with the given significant digits (certified approximation)."""
    return f"{float(x.approx(Q(1, 10 ** (digits + 5)))):.{digits}g}"
