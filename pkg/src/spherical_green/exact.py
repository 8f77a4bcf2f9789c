"""Exact rational polynomials and rational functions.

Scalars are :class:`fractions.Fraction` (always reduced, positive
denominator).  Polynomials are immutable coefficient tuples indexed by degree
with no trailing zeros; the zero polynomial is the empty tuple.
"""

from fractions import Fraction
from math import comb

from .errors import DegreeCapError, DomainError, InexactDivisionError

BigRational = Fraction

DEGREE_CAP = 64
BIT_CAP = 1 << 16


def as_rational(value):
    """Coerce int, Fraction or a ``"p/q"`` string to a Fraction (floats refused)."""
    if isinstance(value, float):
        raise TypeError("floats are not exact; pass a Fraction or a 'p/q' string")
    return Fraction(value)


class RationalPoly:
    """Univariate polynomial with rational coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=(), cap=None):
        cs = [as_rational(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        limit = DEGREE_CAP if cap is None else cap
        if len(cs) - 1 > limit:
            raise DegreeCapError(f"degree {len(cs) - 1} exceeds cap {limit}")
        for c in cs:
            if c.numerator.bit_length() > BIT_CAP or c.denominator.bit_length() > BIT_CAP:
                raise DegreeCapError("coefficient exceeds the configured bit length")
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("RationalPoly is immutable")

    @classmethod
    def x(cls):
        return cls((0, 1))

    @classmethod
    def const(cls, c):
        return cls((c,))

    @classmethod
    def monomial(cls, degree, c=1):
        return cls([0] * degree + [c])

    @property
    def degree(self):
        """Degree, with ``-1`` for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    def lead(self):
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __getitem__(self, i):
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def __eq__(self, other):
        if not isinstance(other, RationalPoly):
            try:
                other = RationalPoly.const(as_rational(other))
            except (TypeError, ValueError):
                return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"RationalPoly({[str(c) for c in self.coeffs]})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            if mono and c == 1:
                terms.append(mono)
            elif mono and c == -1:
                terms.append("-" + mono)
            else:
                terms.append(f"{c}{'*' + mono if mono else ''}")
        return " + ".join(terms).replace("+ -", "- ")

    def _coerce(self, other):
        if isinstance(other, RationalPoly):
            return other
        return RationalPoly.const(as_rational(other))

    def __add__(self, other):
        other = self._coerce(other)
        m = max(len(self.coeffs), len(other.coeffs))
        return RationalPoly([self[i] + other[i] for i in range(m)])

    __radd__ = __add__

    def __neg__(self):
        return RationalPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        if not self.coeffs or not other.coeffs:
            return RationalPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return RationalPoly(out)

    __rmul__ = __mul__

    def __pow__(self, e):
        if e < 0:
            raise DomainError("negative polynomial power")
        out = RationalPoly((1,))
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out

    def divmod(self, other):
        """Euclidean division ``self = q*other + r`` with ``deg r < deg other``."""
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        lead = other.lead()
        quo = [Fraction(0)] * max(len(rem) - dq, 0)
        for i in range(len(rem) - 1, dq - 1, -1):
            c = rem[i] / lead
            if c == 0:
                continue
            quo[i - dq] = c
            for j, b in enumerate(other.coeffs):
                rem[i - dq + j] -= c * b
        return RationalPoly(quo), RationalPoly(rem)

    def exact_div(self, other):
        q, r = self.divmod(other)
        if not r.is_zero():
            raise InexactDivisionError(f"nonzero remainder {r}")
        return q

    def __call__(self, x):
        """Horner evaluation; exact for Fraction/int input, float otherwise."""
        out = 0 if isinstance(x, (int, Fraction)) else 0.0
        for c in reversed(self.coeffs):
            out = out * x + (c if isinstance(x, (int, Fraction)) else float(c))
        return out

    def derivative(self, order=1):
        return poly_derivative(self, order)

    def monic(self):
        if self.is_zero():
            return self
        lead = self.lead()
        return RationalPoly([c / lead for c in self.coeffs])

    def scale(self, c):
        c = as_rational(c)
        return RationalPoly([c * a for a in self.coeffs])

    def valuation(self):
        """Multiplicity of the root at 0 (``0`` for the zero polynomial)."""
        for i, c in enumerate(self.coeffs):
            if c != 0:
                return i
        return 0

    def to_floats(self):
        return [float(c) for c in self.coeffs]


def poly_derivative(p, order=1):
    """Exact ``order``-th derivative."""
    if order < 0:
        raise DomainError("derivative order must be >= 0")
    cs = list(p.coeffs)
    for _ in range(order):
        cs = [i * cs[i] for i in range(1, len(cs))]
    return RationalPoly(cs)


def poly_gcd(a, b):
    """Monic greatest common divisor (the zero polynomial if both vanish)."""
    while not b.is_zero():
        a, b = b, a.divmod(b)[1]
    return a.monic()


def one_minus_x2(power):
    """``(1 - x^2)^power`` expanded."""
    return RationalPoly((1, 0, -1)) ** power


def weighted_moment_exact(m, p):
    """``int_{-1}^{1} x^m (1-x^2)^p dx`` as an exact rational."""
    if m < 0 or p < 0:
        raise DomainError("moment indices must be >= 0")
    if m % 2:
        return Fraction(0)
    return sum(
        (Fraction((-1) ** j * comb(p, j) * 2, m + 2 * j + 1) for j in range(p + 1)),
        Fraction(0),
    )


def integrate_weighted(poly, p):
    """``int_{-1}^{1} poly(x) (1-x^2)^p dx`` exactly."""
    return sum((c * weighted_moment_exact(i, p) for i, c in enumerate(poly.coeffs)), Fraction(0))


class RationalFn:
    """Ratio of rational polynomials kept in lowest terms with monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        num = num if isinstance(num, RationalPoly) else RationalPoly.const(num)
        den = RationalPoly((1,)) if den is None else (den if isinstance(den, RationalPoly) else RationalPoly.const(den))
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero():
            num, den = RationalPoly(), RationalPoly((1,))
        else:
            g = poly_gcd(num, den)
            if g.degree > 0:
                num = num.exact_div(g)
                den = den.exact_div(g)
            lead = den.lead()
            num, den = num.scale(1 / lead), den.scale(1 / lead)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("RationalFn is immutable")

    def _coerce(self, other):
        if isinstance(other, RationalFn):
            return other
        if isinstance(other, RationalPoly):
            return RationalFn(other)
        return RationalFn(RationalPoly.const(as_rational(other)))

    def __add__(self, other):
        other = self._coerce(other)
        return RationalFn(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFn(-self.num, self.den)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        return RationalFn(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFn(self.num * other.den, self.den * other.num)

    def __eq__(self, other):
        try:
            other = self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __repr__(self):
        return f"RationalFn(({self.num}) / ({self.den}))"

    def is_zero(self):
        return self.num.is_zero()

    def derivative(self):
        return RationalFn(
            self.num.derivative() * self.den - self.num * self.den.derivative(),
            self.den * self.den,
        )

    def pole_order_at_zero(self):
        return self.den.valuation()

    def __call__(self, x):
        return self.num(x) / self.den(x)


def radial_laplacian(F, n):
    """``F'' + (n-1) F'/r`` for a radial rational function ``F(r)`` in R^n.

    Raises
    ------
    InexactDivisionError
        If the division by ``r`` introduces an odd-order pole at the origin
        that ``F`` did not have, i.e. the input is not smooth as a radial
        function.
    """
    if n < 1:
        raise DomainError("dimension must be positive")
    if not isinstance(F, RationalFn):
        F = RationalFn(F)
    d1 = F.derivative()
    out = d1.derivative() + d1 * (n - 1) / RationalFn(RationalPoly.x())
    before, after = F.pole_order_at_zero(), out.pole_order_at_zero()
    if before % 2 == 0 and after % 2 == 1:
        raise InexactDivisionError(
            f"Laplacian acquires an odd pole of order {after} at r=0; input is not radially smooth"
        )
    return out
