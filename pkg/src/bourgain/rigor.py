"""Outward-rounded enclosures of real numbers.

A :class:`DirectedValue` is a closed interval ``[lo, hi]`` of binary64
floats that contains the exact real value it stands for.  Every operation
returns an interval containing the exact result of applying the operation
to any reals inside its inputs.

Widening rules:

* ``+ - * /`` and ``sqrt`` are correctly rounded by IEEE 754.  The sign of
  the rounding error is recovered with an error-free transformation
  (TwoSum, Dekker's TwoProduct), so exact results stay points and inexact
  ones are widened by one ulp on the side the true value lies.  When the
  error-free transformation is unsafe (overflow or subnormal range) the
  result is widened by one ulp on both sides.
* ``exp``, ``log``, ``expm1`` and ``log1p`` come from the platform libm,
  which is not correctly rounded.  Monotone functions are evaluated at the
  endpoints and each endpoint is widened outward by :data:`LIBM_ULPS` ulps.
* Non-integer powers are ``exp(y * log(x))``.  Integer powers are repeated
  multiplication.

Comparisons are three-valued in spirit: :func:`definitely_less` is true
only when the enclosures are disjoint, and anything else must be treated
by callers as a failed inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import DomainError, IndeterminateDivision

__all__ = [
    "DirectedValue",
    "LIBM_ULPS",
    "PI",
    "definitely_less",
    "definitely_leq",
    "dv",
    "dv_arith",
    "dv_from_fraction",
    "dv_from_int",
    "dv_max",
    "dv_min",
    "dv_transcendental",
    "exp",
    "expm1",
    "ln",
    "log1p",
    "pow_int",
    "pow_real",
    "sqrt",
]

#: ulps of outward widening applied to each endpoint of a libm result.
#: glibc documents errors below 1 ulp for these functions on x86-64 and
#: aarch64; 4 leaves a margin for other platforms.
LIBM_ULPS = 4

_INF = math.inf
# Dekker splitting is exact only away from overflow and gradual underflow.
_SPLIT_MAX = 2.0**995
_PROD_MIN = 2.0**-960
_SPLITTER = 134217729.0  # 2**27 + 1

Number = Union["DirectedValue", int, float, Fraction]


def _down(x: float, k: int = 1) -> float:
    for _ in range(k):
        x = math.nextafter(x, -_INF)
    return x


def _up(x: float, k: int = 1) -> float:
    for _ in range(k):
        x = math.nextafter(x, _INF)
    return x


def _two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _split(a: float) -> tuple[float, float]:
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a: float, b: float) -> tuple[float, float | None]:
    """Return ``p, e`` with ``a*b == p + e`` exactly, or ``e=None`` if unsafe."""
    p = a * b
    if p == 0.0 or not math.isfinite(p):
        return p, (0.0 if (a == 0.0 or b == 0.0) else None)
    if abs(a) > _SPLIT_MAX or abs(b) > _SPLIT_MAX or abs(p) < _PROD_MIN:
        return p, None
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def _bracket(r: float, err: float | None) -> tuple[float, float]:
    """Enclose ``r + err`` given the sign of the rounding error."""
    if err is None:
        return _down(r), _up(r)
    if err > 0:
        return r, _up(r)
    if err < 0:
        return _down(r), r
    return r, r


def _add_lo(a: float, b: float) -> float:
    s = a + b
    if not math.isfinite(s):
        if s != s:
            return -_INF
        # finite operands that overflow still have a finite sum
        return _down(s) if math.isfinite(a) and math.isfinite(b) else s
    _, e = _two_sum(a, b)
    return _down(s) if e < 0 else s


def _add_hi(a: float, b: float) -> float:
    s = a + b
    if not math.isfinite(s):
        if s != s:
            return _INF
        return _up(s) if math.isfinite(a) and math.isfinite(b) else s
    _, e = _two_sum(a, b)
    return _up(s) if e > 0 else s


def _mul_bounds(a: float, b: float) -> tuple[float, float]:
    # 0 * inf is taken as 0: the interval convention for products.
    if a == 0.0 or b == 0.0:
        return 0.0, 0.0
    p, e = _two_prod(a, b)
    if math.isinf(p):
        return (_down(p), p) if p > 0 else (p, _up(p))
    return _bracket(p, e)


def _div_bounds(a: float, b: float) -> tuple[float, float]:
    if a == 0.0:
        return 0.0, 0.0
    if math.isinf(b):
        if math.isinf(a):
            return -_INF, _INF
        return (-0.0, 0.0)
    q = a / b
    if not math.isfinite(q) or q == 0.0 or math.isinf(a):
        return _down(q), _up(q)
    p, e = _two_prod(q, b)
    if e is None:
        return _down(q), _up(q)
    # a - p is exact by Sterbenz since q*b is within a factor two of a.
    rem = (a - p) - e
    if rem == 0.0:
        return q, q
    sign = (rem > 0) == (b > 0)
    return (q, _up(q)) if sign else (_down(q), q)


@dataclass(frozen=True)
class DirectedValue:
    """Certified enclosure ``[lo, hi]`` of a real number."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise DomainError("enclosure endpoint is NaN")
        if lo > hi:
            raise ValueError(f"lo > hi: [{lo!r}, {hi!r}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    # construction -------------------------------------------------------

    @classmethod
    def point(cls, x: float) -> DirectedValue:
        """A float is an exact binary rational, so it encloses itself."""
        return cls(x, x)

    @classmethod
    def coerce(cls, x: Number) -> DirectedValue:
        if isinstance(x, DirectedValue):
            return x
        if isinstance(x, bool):
            raise TypeError("bool is not a number here")
        if isinstance(x, int):
            return dv_from_int(x)
        if isinstance(x, Fraction):
            return dv_from_fraction(x)
        if isinstance(x, float):
            return cls(x, x)
        raise TypeError(f"cannot enclose {type(x).__name__}")

    # inspection ---------------------------------------------------------

    @property
    def mid(self) -> float:
        return 0.5 * self.lo + 0.5 * self.hi

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def rel_width(self) -> float:
        if self.lo == 0.0:
            return 0.0 if self.hi == 0.0 else _INF
        return (self.hi - self.lo) / abs(self.lo)

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x: Number) -> bool:
        """Exact membership test; ``x`` may be a Fraction or anything with ``as_integer_ratio``."""
        if isinstance(x, DirectedValue):
            return self.lo <= x.lo and x.hi <= self.hi
        if isinstance(x, float) and math.isinf(x):
            return self.lo <= x <= self.hi
        xf = Fraction(x) if not isinstance(x, Fraction) else x
        lo_ok = self.lo == -_INF or Fraction(self.lo) <= xf
        hi_ok = self.hi == _INF or xf <= Fraction(self.hi)
        return lo_ok and hi_ok

    def __repr__(self) -> str:
        return f"DirectedValue({self.lo!r}, {self.hi!r})"

    # arithmetic ---------------------------------------------------------

    def __neg__(self) -> DirectedValue:
        return DirectedValue(-self.hi, -self.lo)

    def __add__(self, other: Number) -> DirectedValue:
        o = DirectedValue.coerce(other)
        return DirectedValue(_add_lo(self.lo, o.lo), _add_hi(self.hi, o.hi))

    __radd__ = __add__

    def __sub__(self, other: Number) -> DirectedValue:
        return self + (-DirectedValue.coerce(other))

    def __rsub__(self, other: Number) -> DirectedValue:
        return DirectedValue.coerce(other) + (-self)

    def __mul__(self, other: Number) -> DirectedValue:
        o = DirectedValue.coerce(other)
        los, his = [], []
        for a in (self.lo, self.hi):
            for b in (o.lo, o.hi):
                lo, hi = _mul_bounds(a, b)
                los.append(lo)
                his.append(hi)
        return DirectedValue(min(los), max(his))

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> DirectedValue:
        o = DirectedValue.coerce(other)
        if o.lo <= 0.0 <= o.hi:
            raise IndeterminateDivision("indeterminate division: divisor encloses 0")
        los, his = [], []
        for a in (self.lo, self.hi):
            for b in (o.lo, o.hi):
                lo, hi = _div_bounds(a, b)
                los.append(lo)
                his.append(hi)
        return DirectedValue(min(los), max(his))

    def __rtruediv__(self, other: Number) -> DirectedValue:
        return DirectedValue.coerce(other) / self

    def __pow__(self, k: int) -> DirectedValue:
        if not isinstance(k, int):
            return NotImplemented
        return pow_int(self, k)


def dv(x: Number | str) -> DirectedValue:
    """Enclose ``x``; strings are parsed as exact decimals or ``p/q``."""
    if isinstance(x, str):
        return dv_from_fraction(Fraction(x))
    return DirectedValue.coerce(x)


def dv_from_int(v: int) -> DirectedValue:
    if -(2**53) <= v <= 2**53:
        f = float(v)
        return DirectedValue(f, f)
    return dv_from_fraction(Fraction(v))


def dv_from_fraction(x: Fraction) -> DirectedValue:
    """Tightest float enclosure of an exact rational."""
    try:
        f = float(x)  # correctly rounded
    except OverflowError:
        return DirectedValue(_down(math.inf) if x > 0 else -_INF, _INF if x > 0 else _up(-math.inf))
    if math.isinf(f):
        return DirectedValue(_down(f), _INF) if f > 0 else DirectedValue(-_INF, _up(f))
    exact = Fraction(f)
    if exact == x:
        return DirectedValue(f, f)
    if exact < x:
        return DirectedValue(f, _up(f))
    return DirectedValue(_down(f), f)


def dv_min(a: DirectedValue, b: DirectedValue) -> DirectedValue:
    return DirectedValue(min(a.lo, b.lo), min(a.hi, b.hi))


def dv_max(a: DirectedValue, b: DirectedValue) -> DirectedValue:
    return DirectedValue(max(a.lo, b.lo), max(a.hi, b.hi))


def definitely_less(a: Number, b: Number) -> bool:
    """True iff every point of ``a`` is strictly below every point of ``b``."""
    return DirectedValue.coerce(a).hi < DirectedValue.coerce(b).lo


def definitely_leq(a: Number, b: Number) -> bool:
    return DirectedValue.coerce(a).hi <= DirectedValue.coerce(b).lo


# transcendental functions ---------------------------------------------


def _libm(f, x: float, default: float) -> float:
    try:
        return f(x)
    except OverflowError:
        return default


def exp(a: Number) -> DirectedValue:
    a = DirectedValue.coerce(a)
    if a.lo == a.hi == 0.0:
        return DirectedValue(1.0, 1.0)
    lo = 0.0 if a.lo == -_INF else max(0.0, _down(_libm(math.exp, a.lo, _INF), LIBM_ULPS))
    hi = _INF if a.hi == _INF else _up(_libm(math.exp, a.hi, _INF), LIBM_ULPS)
    return DirectedValue(lo, hi)


def expm1(a: Number) -> DirectedValue:
    a = DirectedValue.coerce(a)
    if a.lo == a.hi == 0.0:
        return DirectedValue(0.0, 0.0)
    lo = -1.0 if a.lo == -_INF else max(-1.0, _down(_libm(math.expm1, a.lo, _INF), LIBM_ULPS))
    hi = _INF if a.hi == _INF else _up(_libm(math.expm1, a.hi, _INF), LIBM_ULPS)
    return DirectedValue(lo, hi)


def ln(a: Number) -> DirectedValue:
    a = DirectedValue.coerce(a)
    if a.lo <= 0.0:
        raise DomainError(f"domain: log of enclosure with lo={a.lo!r} <= 0")
    if a.lo == a.hi == 1.0:
        return DirectedValue(0.0, 0.0)
    hi = _INF if a.hi == _INF else _up(math.log(a.hi), LIBM_ULPS)
    return DirectedValue(_down(math.log(a.lo), LIBM_ULPS), hi)


def log1p(a: Number) -> DirectedValue:
    a = DirectedValue.coerce(a)
    if a.lo <= -1.0:
        raise DomainError(f"domain: log1p of enclosure with lo={a.lo!r} <= -1")
    if a.lo == a.hi == 0.0:
        return DirectedValue(0.0, 0.0)
    hi = _INF if a.hi == _INF else _up(math.log1p(a.hi), LIBM_ULPS)
    return DirectedValue(_down(math.log1p(a.lo), LIBM_ULPS), hi)


def _sqrt_bounds(x: float) -> tuple[float, float]:
    if x == 0.0 or math.isinf(x):
        return x, x
    r = math.sqrt(x)
    p, e = _two_prod(r, r)
    if e is None:
        return _down(r), _up(r)
    rem = (x - p) - e
    if rem > 0:
        return r, _up(r)
    if rem < 0:
        return _down(r), r
    return r, r


def sqrt(a: Number) -> DirectedValue:
    a = DirectedValue.coerce(a)
    if a.lo < 0.0:
        raise DomainError(f"domain: sqrt of enclosure with lo={a.lo!r} < 0")
    return DirectedValue(_sqrt_bounds(a.lo)[0], _sqrt_bounds(a.hi)[1])


def _point_pow(x: float, k: int) -> DirectedValue:
    """Enclosure of ``x**k`` for ``k >= 0`` by binary powering."""
    result = DirectedValue(1.0, 1.0)
    base = DirectedValue(x, x)
    while k:
        if k & 1:
            result = result * base
        k >>= 1
        if k:
            base = base * base
    return result


def pow_int(a: Number, k: int) -> DirectedValue:
    a = DirectedValue.coerce(a)
    if k < 0:
        # invert first: a**|k| may underflow to 0 even when a excludes 0
        return pow_int(1 / a, -k)
    if k == 0:
        return DirectedValue(1.0, 1.0)
    if k % 2 == 1:
        return DirectedValue(_point_pow(a.lo, k).lo, _point_pow(a.hi, k).hi)
    if a.lo >= 0.0:
        return DirectedValue(_point_pow(a.lo, k).lo, _point_pow(a.hi, k).hi)
    if a.hi <= 0.0:
        return DirectedValue(_point_pow(-a.hi, k).lo, _point_pow(-a.lo, k).hi)
    mag = max(-a.lo, a.hi)
    return DirectedValue(0.0, _point_pow(mag, k).hi)


def pow_real(a: Number, y: Number) -> DirectedValue:
    """``a ** y`` for ``a > 0`` computed as ``exp(y * log(a))``."""
    a = DirectedValue.coerce(a)
    if a.lo <= 0.0:
        raise DomainError(f"domain: real power of enclosure with lo={a.lo!r} <= 0")
    return exp(DirectedValue.coerce(y) * ln(a))


PI = DirectedValue(math.pi, math.nextafter(math.pi, _INF))  # math.pi < pi


# name-based dispatchers ----------------------------------------------

_ARITH = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
}


def dv_arith(a: Number, b: Number, op: str) -> DirectedValue:
    try:
        f = _ARITH[op]
    except KeyError:
        raise ValueError(f"unknown op {op!r}") from None
    return f(DirectedValue.coerce(a), DirectedValue.coerce(b))


def dv_transcendental(a: Number, f: str, exponent: Number | None = None) -> DirectedValue:
    """Apply ``ln``, ``exp``, ``sqrt``, ``expm1``, ``log1p``, ``pow`` or ``pow_int``."""
    if f == "pow":
        if exponent is None:
            raise ValueError("pow needs an exponent")
        return pow_real(a, exponent)
    if f == "pow_int":
        if not isinstance(exponent, int):
            raise ValueError("pow_int needs an integer exponent")
        return pow_int(a, exponent)
    funcs = {"ln": ln, "exp": exp, "sqrt": sqrt, "expm1": expm1, "log1p": log1p}
    try:
        return funcs[f](a)
    except KeyError:
        raise ValueError(f"unknown function {f!r}") from None
