"""Exact arithmetic in the field Q(b^(1/q)).

Net contents and Frostman masses are sums of powers ``m**(-j*s)``.  For a
rational exponent ``s = p/q`` all of them live in ``Q(theta)`` with
``theta = m**(1/q)``.  After pulling out the largest power ``g | q`` with
``m`` a perfect ``g``-th power, ``theta = b**(1/q')`` where ``x**q' - b`` is
irreducible over Q (Capelli), so ``1, theta, ..., theta**(q'-1)`` is a basis
and equality is coefficient equality.

Signs of nonzero elements are decided by bracketing ``theta`` between
dyadic rationals obtained from an integer root, refining until the
bracket excludes zero.  No floating point is involved anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Union

__all__ = ["RadicalField", "RadicalNumber", "iroot", "field_for_power"]

Scalar = Union[int, Fraction]


def iroot(n: int, k: int) -> int:
    """Floor of the ``k``-th root of a nonnegative integer."""
    if n < 0:
        raise ValueError("negative radicand")
    if n < 2 or k == 1:
        return n
    x = 1 << -(-n.bit_length() // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x**k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


@dataclass(frozen=True)
class RadicalField:
    """``Q(theta)``, ``theta = base**(1/degree)``, ``x**degree - base`` irreducible."""

    base: int
    degree: int

    def __post_init__(self) -> None:
        if self.base < 2 or self.degree < 1:
            raise ValueError("need base >= 2 and degree >= 1")

    def zero(self) -> RadicalNumber:
        return RadicalNumber(self, (Fraction(0),) * self.degree)

    def scalar(self, c: Scalar) -> RadicalNumber:
        return RadicalNumber(self, (Fraction(c),) + (Fraction(0),) * (self.degree - 1))

    def theta_power(self, e: int) -> RadicalNumber:
        """``theta**e`` for any integer ``e``."""
        u, r = divmod(e, self.degree)
        coeff = Fraction(self.base) ** u
        coeffs = [Fraction(0)] * self.degree
        coeffs[r] = coeff
        return RadicalNumber(self, tuple(coeffs))

    def from_coeffs(self, coeffs: Iterable[Scalar]) -> RadicalNumber:
        cs = tuple(Fraction(c) for c in coeffs)
        if len(cs) != self.degree:
            raise ValueError(f"expected {self.degree} coefficients, got {len(cs)}")
        return RadicalNumber(self, cs)

    def theta_bracket(self, bits: int) -> tuple[Fraction, Fraction]:
        scale = 1 << bits
        root = iroot(self.base * scale**self.degree, self.degree)
        return Fraction(root, scale), Fraction(root + 1, scale)


def field_for_power(m: int, s: Fraction) -> tuple[RadicalField, int]:
    """Field holding ``m**(-j*s)`` and the exponent step ``p``.

    Returns ``(F, p)`` such that ``m**(-j*s) == F.theta_power(-j*p)``.
    """
    s = Fraction(s)
    p, q = s.numerator, s.denominator
    g = q
    while g > 1:
        if q % g == 0:
            r = iroot(m, g)
            if r**g == m:
                return RadicalField(r, q // g), p
        g -= 1
    return RadicalField(m, q), p


@total_ordering
class RadicalNumber:
    """Element ``sum(c[i] * theta**i)`` of a :class:`RadicalField`."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: RadicalField, coeffs: tuple[Fraction, ...]):
        self.field = field
        self.coeffs = coeffs

    def _lift(self, other) -> RadicalNumber:
        if isinstance(other, RadicalNumber):
            if other.field != self.field:
                raise ValueError("elements of different radical fields")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.scalar(other)
        return NotImplemented

    def __add__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return RadicalNumber(self.field, tuple(a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self) -> RadicalNumber:
        return RadicalNumber(self.field, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        q, b = self.field.degree, self.field.base
        if q == 1:
            return RadicalNumber(self.field, (self.coeffs[0] * o.coeffs[0],))
        out = [Fraction(0)] * q
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, c in enumerate(o.coeffs):
                if not c:
                    continue
                k = i + j
                if k >= q:
                    out[k - q] += b * a * c
                else:
                    out[k] += a * c
        return RadicalNumber(self.field, tuple(out))

    __rmul__ = __mul__

    def inverse(self) -> RadicalNumber:
        q = self.field.degree
        if q == 1:
            if not self.coeffs[0]:
                raise ZeroDivisionError("inverse of zero")
            return RadicalNumber(self.field, (1 / self.coeffs[0],))
        # column j of the matrix is self * theta**j
        cols = [(self * self.field.theta_power(j)).coeffs for j in range(q)]
        rows = [[cols[j][i] for j in range(q)] + [Fraction(int(i == 0))] for i in range(q)]
        for c in range(q):
            piv = next((r for r in range(c, q) if rows[r][c]), None)
            if piv is None:
                raise ZeroDivisionError("inverse of zero")
            rows[c], rows[piv] = rows[piv], rows[c]
            pv = rows[c][c]
            rows[c] = [x / pv for x in rows[c]]
            for r in range(q):
                if r != c and rows[r][c]:
                    f = rows[r][c]
                    rows[r] = [x - f * y for x, y in zip(rows[r], rows[c])]
        return RadicalNumber(self.field, tuple(rows[i][q] for i in range(q)))

    def __truediv__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        if o.is_rational():
            c = o.coeffs[0]
            if not c:
                raise ZeroDivisionError("division by zero")
            return RadicalNumber(self.field, tuple(a / c for a in self.coeffs))
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self._lift(other) / self

    # comparison -------------------------------------------------------

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("element is irrational")
        return self.coeffs[0]

    def sign(self) -> int:
        if self.is_zero():
            return 0
        if self.is_rational():
            return 1 if self.coeffs[0] > 0 else -1
        bits = 32
        while True:
            lo_t, hi_t = self.field.theta_bracket(bits)
            lo = hi = Fraction(0)
            for i, c in enumerate(self.coeffs):
                if not c:
                    continue
                a, b = c * lo_t**i, c * hi_t**i
                lo += min(a, b)
                hi += max(a, b)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            bits *= 2

    def __eq__(self, other) -> bool:
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return self.coeffs == o.coeffs

    def __hash__(self) -> int:
        if self.is_rational():
            return hash(self.coeffs[0])
        return hash((self.field, self.coeffs))

    def __lt__(self, other) -> bool:
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return (self - o).sign() < 0

    def __float__(self) -> float:
        t = self.field.base ** (1.0 / self.field.degree)
        return float(sum(float(c) * t**i for i, c in enumerate(self.coeffs)))

    def __repr__(self) -> str:
        return f"RadicalNumber({self})"

    def __str__(self) -> str:
        if self.is_rational():
            return str(self.coeffs[0])
        b, q = self.field.base, self.field.degree
        terms = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            if i == 0:
                terms.append(str(c))
            else:
                root = f"{b}^({i}/{q})" if i > 1 else f"{b}^(1/{q})"
                terms.append(f"{c}*{root}")
        return " + ".join(terms)

    def to_json(self):
        """``"p/q"`` when rational, else the coefficient list as strings."""
        if self.is_rational():
            return str(self.coeffs[0])
        return [str(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, field: RadicalField, value) -> RadicalNumber:
        if isinstance(value, str):
            return field.scalar(Fraction(value))
        return field.from_coeffs(Fraction(v) for v in value)
