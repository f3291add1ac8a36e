"""Certified constants for Bourgain's estimate on harmonic measure.

The estimate bounds the net content of an obstacle near the center of an
m-adic cube by ``alpha`` times its harmonic measure.  ``alpha`` is the
ratio of the optimized potential bound ``O(n, m, s)`` (a minimum over an
integer scale parameter ``k``) to the geometric gap term
``(1/sqrt(n))**(n-2) - (2/(m - xi_m))**(n-2)``.

Closed forms for n = 3 and n = 4 fix ``k = 1`` and ``s`` at the bottom of
the range ``[n - 1e-6, n]``; they are rounded up to six significant
digits so the printed constants can be reused verbatim downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import ROUND_CEILING, Decimal, localcontext
from fractions import Fraction

from .errors import ConfigError, GeometryError, ScanRangeError
from .rigor import (
    PI,
    DirectedValue,
    dv,
    dv_from_fraction,
    pow_int,
    pow_real,
    sqrt,
)

DEFAULT_K_RANGE = (-10, 10)
MAX_K_SPAN = 640
CLOSED_FORM_EPSILON = Fraction(1, 10**6)
ALPHA_SIG_DIGITS = 6


def xi(m: int) -> int:
    """Gap correction: 1 for odd ``m`` (centered child cube), 2 for even."""
    if m < 2:
        raise ConfigError(f"config: m must be >= 2, got {m}")
    return 1 if m % 2 else 2


def geometry_ok(n: int, m: int) -> bool:
    """Exact test of ``m > xi_m + 2*sqrt(n)``."""
    gap = m - xi(m)
    return gap > 0 and gap * gap > 4 * n


def check_dimensions(n: int, m: int) -> None:
    if n < 3:
        raise ConfigError(f"config: n must be >= 3, got {n}")
    if m < 5:
        raise ConfigError(f"config: m must be >= 5, got {m}")
    if not geometry_ok(n, m):
        raise ConfigError(f"config: m={m} violates m > xi_m + 2*sqrt(n) for n={n}")


@dataclass(frozen=True)
class EstimateConfig:
    n: int
    m: int
    s: Fraction
    k_range: tuple[int, int] | None = field(default=None)

    def __post_init__(self) -> None:
        s = Fraction(str(self.s)) if isinstance(self.s, float) else Fraction(self.s)
        object.__setattr__(self, "s", s)
        check_dimensions(self.n, self.m)
        if not (self.n - 1 < s <= self.n):
            raise ConfigError(f"config: s={s} outside (n-1, n]")
        if self.k_range is not None and self.k_range[0] >= self.k_range[1]:
            raise ConfigError(f"config: empty k range {self.k_range}")


def unit_ball_volume(n: int) -> DirectedValue:
    """Volume of the unit ball via ``w_n = w_{n-2} * 2*pi/n``."""
    if n < 1:
        raise ConfigError("config: dimension must be >= 1")
    w = dv(2) if n % 2 else PI
    for j in range(3 if n % 2 else 4, n + 1, 2):
        w = w * (2 * PI) / j
    return w


def _minimand(n: int, m: int, k: int, s: DirectedValue, s_sup: DirectedValue | None = None) -> DirectedValue:
    """Minimand of ``O`` at scale ``k``.

    With ``s_sup`` given, returns an upper enclosure valid for every ``s``
    in ``[s, s_sup]``: each factor is monotone in ``s`` and is taken at its
    worst endpoint.
    """
    first = pow_int(2 * pow_int(dv(m), k) / ((n - 2) * sqrt(n)), n - 2)
    const = unit_ball_volume(n) / 4 * pow_int(dv(m * n) / (n - 2), n - 2) * n**3
    if s_sup is None:
        scale = pow_real(m, k * (n - 2 - s))
        geom = 1 - pow_real(m, n - 2 - s)
    else:
        # m**(k*(n-2-s)) increases with s iff k < 0; the geometric factor
        # 1 - m**(n-2-s) increases with s, so its worst case is the smallest s
        worst_s = s_sup if k < 0 else s
        scale = pow_real(m, k * (n - 2 - worst_s))
        geom = 1 - pow_real(m, n - 2 - s)
    if geom.lo <= 0:
        raise ConfigError("config: s too small, geometric factor not positive")
    return first + const * scale / geom


def o_value(cfg: EstimateConfig, k: int) -> DirectedValue:
    """Certified value of the minimand of ``O(n, m, s)`` at scale ``k``."""
    if cfg.s <= cfg.n - 2:
        raise ConfigError("config: s must exceed n-2")
    return _minimand(cfg.n, cfg.m, k, dv_from_fraction(cfg.s))


def _scan(values, k_lo: int, k_hi: int):
    best_k = min(range(k_lo, k_hi + 1), key=lambda k: (values[k].hi, k))
    lo = min(v.lo for v in values.values())
    return DirectedValue(lo, values[best_k].hi), best_k


def _bracketed(values, k_lo: int, k_hi: int, best: DirectedValue) -> bool:
    return values[k_lo].lo > best.hi and values[k_hi].lo > best.hi


def _minimize(evaluate, k_range: tuple[int, int] | None) -> tuple[DirectedValue, int]:
    auto = k_range is None
    k_lo, k_hi = k_range or DEFAULT_K_RANGE
    while True:
        values = {k: evaluate(k) for k in range(k_lo, k_hi + 1)}
        best, k_best = _scan(values, k_lo, k_hi)
        if _bracketed(values, k_lo, k_hi, best):
            return best, k_best
        if not auto or k_hi - k_lo > MAX_K_SPAN:
            raise ScanRangeError(
                f"scan range too small: minimum over k in [{k_lo}, {k_hi}] not interior"
            )
        k_lo, k_hi = 2 * k_lo, 2 * k_hi


def o_min(cfg: EstimateConfig) -> tuple[DirectedValue, int]:
    """Minimum of the minimand over ``k`` and the (smallest) argmin.

    The first term grows without bound as ``k -> +inf`` and the second as
    ``k -> -inf``, so the scan must show both boundary values certifiably
    above the interior minimum.  The default range widens until it does.
    """
    return _minimize(lambda k: o_value(cfg, k), cfg.k_range)


def geometric_gap(n: int, m: int) -> DirectedValue:
    gap = pow_int(1 / sqrt(n), n - 2) - pow_int(dv(Fraction(2, m - xi(m))), n - 2)
    if gap.lo <= 0:
        raise GeometryError(f"geometry: gap term not positive for n={n}, m={m}")
    return gap


def alpha_general(cfg: EstimateConfig) -> DirectedValue:
    """Raw enclosure of ``alpha`` for the single exponent ``cfg.s``."""
    gap = geometric_gap(cfg.n, cfg.m)
    o, _ = o_min(cfg)
    return o / gap


def alpha_for_range(n: int, m: int, epsilon: Fraction, k_range: tuple[int, int] | None = None) -> tuple[DirectedValue, int]:
    """``alpha`` valid simultaneously for every ``s`` in ``(n - epsilon, n]``.

    For ``k >= 0`` every factor of the minimand decreases in ``s``, so the
    value at ``s = n - epsilon`` dominates the range.  For ``k < 0`` the
    scale factor is taken at ``s = n`` instead.  Returns the enclosure and
    the minimizing ``k``.
    """
    epsilon = Fraction(epsilon)
    if not (0 < epsilon <= 1):
        raise ConfigError(f"config: epsilon={epsilon} outside (0, 1]")
    check_dimensions(n, m)
    s_lo, s_hi = dv_from_fraction(n - epsilon), dv(n)
    gap = geometric_gap(n, m)
    o, k = _minimize(lambda k: _minimand(n, m, k, s_lo, s_hi), k_range)
    return o / gap, k


def ceil_significant(x: float, digits: int = ALPHA_SIG_DIGITS) -> Fraction:
    """Smallest decimal with ``digits`` significant digits that is ``>= x`` exactly."""
    if not (x > 0 and math.isfinite(x)):
        raise ValueError("need a positive finite value")
    with localcontext() as ctx:
        ctx.prec = digits
        ctx.rounding = ROUND_CEILING
        d = +Decimal(x)  # unary plus rounds to context precision
    return Fraction(d)


def _closed_form(raw: DirectedValue) -> DirectedValue:
    return dv_from_fraction(ceil_significant(raw.hi))


def alpha3_raw(m: int) -> DirectedValue:
    if m < 5:
        raise ConfigError(f"config: closed form for n=3 needs m >= 5, got {m}")
    mm = dv(m)
    rhs = 2 * mm / sqrt(3) + 27 * PI * pow_real(mm, dv("-0.999999")) / (1 - pow_real(mm, dv("-1.999999")))
    lhs = 1 / sqrt(3) - dv(Fraction(2, m - xi(m)))
    return rhs / lhs


def alpha4_raw(m: int) -> DirectedValue:
    if m < 7:
        raise ConfigError(f"config: closed form for n=4 needs m >= 7, got {m}")
    mm = dv(m)
    rhs = pow_int(mm, 2) / 4 + 32 * pow_int(PI, 2) * pow_real(mm, dv("0.000001")) / (
        1 - pow_real(mm, dv("-1.999999"))
    )
    lhs = dv(Fraction(1, 4)) - pow_int(dv(Fraction(2, m - xi(m))), 2)
    return rhs / lhs


def alpha3(m: int) -> DirectedValue:
    """``alpha`` for n = 3, valid for ``s`` in ``[2.999999, 3]``, rounded up to 6 digits."""
    return _closed_form(alpha3_raw(m))


def alpha4(m: int) -> DirectedValue:
    """``alpha`` for n = 4, valid for ``s`` in ``[3.999999, 4]``, rounded up to 6 digits."""
    return _closed_form(alpha4_raw(m))


def closed_form_alpha(n: int, m: int) -> DirectedValue:
    return dv_from_fraction(closed_form_value(n, m))


def closed_form_value(n: int, m: int) -> Fraction:
    """The rounded closed-form constant as an exact decimal."""
    if n == 3:
        return ceil_significant(alpha3_raw(m).hi)
    if n == 4:
        return ceil_significant(alpha4_raw(m).hi)
    raise ConfigError(f"config: no closed form for n={n}")


def select_alpha(n: int, m: int, source: str = "closed", epsilon: Fraction = CLOSED_FORM_EPSILON) -> DirectedValue:
    """``alpha`` from the n=3/n=4 closed forms (``"closed"``) or the general scan."""
    if source == "closed":
        if Fraction(epsilon) != CLOSED_FORM_EPSILON:
            raise ConfigError("config: closed forms are only valid for epsilon = 1e-6")
        return closed_form_alpha(n, m)
    if source == "general":
        return alpha_for_range(n, m, Fraction(epsilon))[0]
    raise ConfigError(f"config: unknown alpha source {source!r}")
