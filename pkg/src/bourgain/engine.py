"""Certified lower bounds on Bourgain's constant from admissible parameters.

Given a Bourgain-type estimate with constant ``alpha`` valid for
``n - epsilon < s <= n``, a tuple ``(eta, h, d)`` yields

* ``gamma = V + (1 - 2h/m)**(n/2) * Pi`` with
  ``V = (1 - (1 - 2h/m)**n)**(1/2)`` and
  ``Pi = eta**(-1/2) * (1 - eta)**(h * m**(d-1) / 2)``,
* ``lambda = -log_m(gamma)``,
* ``rho = min(epsilon, 0.914186 (1 - alpha eta)(1 - m**-n) m**(-(d+1)n) / ln m)``,

and ``b_n >= lambda rho / (lambda + rho)`` whenever
``(2 - m**-n) alpha eta <= 1 - m**-n``, ``1 <= h < m/2`` and ``gamma < 1``.

``rho`` is carried as a log enclosure as well as a plain one: for large
``n`` the factor ``m**(-(d+1)n)`` is far below the binary64 range, while
its logarithm is not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import ROUND_CEILING, ROUND_FLOOR, Decimal, localcontext
from fractions import Fraction
from typing import Any

from .errors import ConfigError
from .rigor import (
    DirectedValue,
    definitely_less,
    dv,
    dv_from_fraction,
    dv_min,
    exp,
    ln,
    log1p,
    pow_int,
    sqrt,
)

#: Constant from the proof that the rho range satisfies the geometric-sum inequality.
RHO_CONSTANT = Fraction("0.914186")

_ZERO = DirectedValue(0.0, 0.0)
_ONE = DirectedValue(1.0, 1.0)
_NEG_INF = DirectedValue(-math.inf, -math.inf)


def format_fraction(x: Fraction) -> str:
    """Short exact text for ``x``: a decimal when it terminates, else ``p/q``."""
    x = Fraction(x)
    den = x.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{x.numerator}/{x.denominator}"
    places = max(twos, fives)
    if places > 30:
        return repr(float(x)) if Fraction(float(x)) == x else f"{x.numerator}/{x.denominator}"
    scaled = x * 10**places
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled.numerator)).rjust(places + 1, "0")
    if places == 0:
        return sign + digits
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def _as_fraction(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(x)
    return Fraction(x)


@dataclass(frozen=True)
class ParameterTuple:
    """One candidate ``(n, m, eta, h, d, epsilon)``."""

    n: int
    m: int
    eta: Fraction
    h: int
    d: int
    epsilon: Fraction = Fraction(1, 10**6)

    def __post_init__(self) -> None:
        object.__setattr__(self, "eta", _as_fraction(self.eta))
        object.__setattr__(self, "epsilon", _as_fraction(self.epsilon))
        if self.n < 3:
            raise ConfigError(f"config: n must be >= 3, got {self.n}")
        if self.m < 5:
            raise ConfigError(f"config: m must be >= 5, got {self.m}")
        if self.eta <= 0:
            raise ConfigError("config: eta must be positive")
        if self.h < 1 or self.d < 1:
            raise ConfigError("config: h and d must be >= 1")
        if self.epsilon <= 0:
            raise ConfigError("config: epsilon must be positive")

    @property
    def h_valid(self) -> bool:
        return 2 * self.h < self.m

    def sort_key(self) -> tuple:
        return (self.n, self.m, self.eta, self.h, self.d, self.epsilon)


def _m_pow_neg_n(n: int, m: int) -> DirectedValue:
    return dv_from_fraction(Fraction(1, m**n))


def eta_max(n: int, m: int, alpha: DirectedValue) -> DirectedValue:
    """Enclosure of the largest admissible ``eta``; ``lo`` is the safe threshold."""
    if alpha.lo <= 0:
        raise ConfigError("config: alpha must be positive")
    t = _m_pow_neg_n(n, m)
    return ((1 - t) / (2 - t)) / alpha


def eta_admissible(n: int, m: int, alpha: DirectedValue, eta) -> bool:
    """Certified ``(2 - m**-n) alpha eta < 1 - m**-n``."""
    t = _m_pow_neg_n(n, m)
    return definitely_less((2 - t) * alpha * dv(eta), 1 - t)


def gamma(p: ParameterTuple) -> tuple[DirectedValue, DirectedValue, DirectedValue]:
    """Return ``(V, Pi, gamma)``.  For ``h >= m/2`` all three are 1."""
    if p.eta >= 1:
        raise ConfigError("config: eta must be < 1")
    if not p.h_valid:
        return _ONE, _ONE, _ONE
    eta = dv(p.eta)
    t = dv(Fraction(p.m - 2 * p.h, p.m))
    tn = pow_int(t, p.n)
    v = sqrt(1 - tn)
    exponent = dv(Fraction(p.h * p.m ** (p.d - 1), 2))
    pi_ = exp(exponent * log1p(-eta)) / sqrt(eta)
    return v, pi_, v + sqrt(tn) * pi_


def lam(m: int, g: DirectedValue) -> DirectedValue:
    """``-log_m(gamma)``, or ``[0, 0]`` unless ``gamma < 1`` is certain."""
    if g.lo <= 0:
        raise ConfigError("config: gamma must be positive")
    if g.hi >= 1:
        return _ZERO
    return -ln(g) / ln(m)


def log_rho(n: int, m: int, alpha: DirectedValue, eta, d: int, epsilon) -> DirectedValue:
    """Natural log of ``rho``; ``[-inf, -inf]`` when ``eta`` is inadmissible."""
    if not eta_admissible(n, m, alpha, eta):
        return _NEG_INF
    a = alpha * dv(eta)
    log_formula = (
        ln(dv(RHO_CONSTANT))
        + log1p(-a)
        + log1p(-_m_pow_neg_n(n, m))
        - (d + 1) * n * ln(m)
        - ln(ln(m))
    )
    return dv_min(ln(dv(epsilon)), log_formula)


def rho(n: int, m: int, alpha: DirectedValue, eta, d: int, epsilon) -> DirectedValue:
    """Enclosure of ``rho`` (may underflow to ``[0, tiny]`` for large ``n``)."""
    lr = log_rho(n, m, alpha, eta, d, epsilon)
    if lr.hi == -math.inf:
        return _ZERO
    return exp(lr)


def _log_t_bounds(j: int, m: int, log_rho_enc: DirectedValue) -> tuple[float, float]:
    """Bounds on ``ln(m**(j rho) - 1)`` for ``rho`` in ``exp(log_rho_enc)``.

    Uses ``x <= expm1(x) <= x * e**x`` with ``x = j rho ln m``.
    """
    log_x = ln(j) + ln(ln(m)) + log_rho_enc
    x_hi = exp(DirectedValue(log_x.hi, log_x.hi)).hi
    upper = (DirectedValue(log_x.hi, log_x.hi) + x_hi).hi
    return log_x.lo, upper


def prelemma_sides(n: int, m: int, d: int, a: DirectedValue, rho_enc: DirectedValue | None = None, *,
                   log_rho_enc: DirectedValue | None = None) -> tuple[DirectedValue, DirectedValue]:
    """Both sides of the geometric-sum inequality after an exact rearrangement.

    The inequality
    ``(m**n - 1) * sum_{j=1}^{d+1} m**(j(rho-n)) < 1 - a m**((d+1)(rho-n))``
    is rewritten with ``t_j = m**(j rho) - 1`` by subtracting 1 (the
    ``rho = 0`` part of the left sum telescopes to ``1 - m**(-(d+1)n)``)
    and multiplying by ``m**((d+1)n)``:

    ``sum_j (m**n - 1) m**((d+1-j)n) t_j + a t_{d+1}  <  1 - a``.

    Each term is summed individually in certified arithmetic, in log
    space so nothing underflows.  Returns ``(lhs, rhs)``.
    """
    if log_rho_enc is None:
        if rho_enc is None:
            raise ValueError("need rho or log rho")
        if rho_enc.lo < 0:
            raise ConfigError("config: rho must be nonnegative")
        if rho_enc.hi == 0:
            log_rho_enc = _NEG_INF
        else:
            lo = -math.inf if rho_enc.lo == 0 else ln(DirectedValue(rho_enc.lo, rho_enc.lo)).lo
            log_rho_enc = DirectedValue(lo, ln(DirectedValue(rho_enc.hi, rho_enc.hi)).hi)
    rhs = 1 - a
    if log_rho_enc.hi == -math.inf:
        return _ZERO, rhs
    log_coef = ln(pow_int(dv(m), n) - 1)
    log_m = ln(m)
    lhs = _ZERO
    t_last = _ZERO
    for j in range(1, d + 2):
        t_lo, t_hi = _log_t_bounds(j, m, log_rho_enc)
        log_scale = log_coef + (d + 1 - j) * n * log_m
        lo = 0.0 if t_lo == -math.inf else exp(log_scale + t_lo).lo
        hi = exp(log_scale + t_hi).hi
        lhs = lhs + DirectedValue(max(lo, 0.0), hi)
        if j == d + 1:
            t_last = exp(DirectedValue(t_lo, t_hi))
    lhs = lhs + a * t_last
    return lhs, rhs


def prelemma_check(n: int, m: int, d: int, a: DirectedValue, rho_enc: DirectedValue | None = None, *,
                   log_rho_enc: DirectedValue | None = None) -> bool:
    """Certified check of the geometric-sum inequality for every ``rho`` in the enclosure.

    Returns False when the hypothesis ``(2 - m**-n) a <= 1 - m**-n`` is not
    certain, when the inequality fails, or when it cannot be decided.
    """
    t = _m_pow_neg_n(n, m)
    if not definitely_less((2 - t) * a, 1 - t) and not (2 - t) * a == 1 - t:
        return False
    lhs, rhs = prelemma_sides(n, m, d, a, rho_enc, log_rho_enc=log_rho_enc)
    return definitely_less(lhs, rhs)


def harmonic_combination(lam_enc: DirectedValue, log_rho_enc: DirectedValue) -> tuple[DirectedValue, DirectedValue]:
    """``lam rho / (lam + rho)`` and its log, from ``lam`` and ``ln rho``.

    Computed as ``ln rho - log1p(rho / lam)``, which is monotone in both
    arguments and never underflows in log space.
    """
    if lam_enc.lo <= 0 or log_rho_enc.lo == -math.inf:
        return _ZERO, _NEG_INF
    ratio = exp(log_rho_enc - ln(lam_enc))
    log_bound = log_rho_enc - log1p(ratio)
    return exp(log_bound), log_bound


@dataclass(frozen=True)
class BoundCertificate:
    params: ParameterTuple
    alpha: DirectedValue
    V: DirectedValue
    Pi: DirectedValue
    gamma: DirectedValue
    lam: DirectedValue
    rho: DirectedValue
    log_rho: DirectedValue
    bound: DirectedValue
    log_bound: DirectedValue
    eta_admissible: bool
    prelemma_verified: bool
    admissible: bool
    reasons: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict[str, Any]:
        """Flat JSON-ready mapping with both endpoints of every enclosure."""
        p = self.params
        out: dict[str, Any] = {
            "n": p.n,
            "m": p.m,
            "eta": format_fraction(p.eta),
            "h": p.h,
            "d": p.d,
            "epsilon": format_fraction(p.epsilon),
        }
        for name in ("alpha", "V", "Pi", "gamma", "lam", "rho", "log_rho", "bound", "log_bound"):
            enc: DirectedValue = getattr(self, name)
            key = "lambda" if name == "lam" else name
            out[f"{key}_lo"] = _json_float(enc.lo)
            out[f"{key}_hi"] = _json_float(enc.hi)
        out["eta_admissible"] = self.eta_admissible
        out["prelemma_verified"] = self.prelemma_verified
        out["admissible"] = self.admissible
        out["reasons"] = list(self.reasons)
        return out


def _json_float(x: float):
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def certify(p: ParameterTuple, alpha: DirectedValue) -> BoundCertificate:
    """Assemble and verify the full certificate for ``p``.

    Inadmissible tuples are not errors: they come back with
    ``admissible=False``, ``bound=[0, 0]`` and the failing checks in
    ``reasons``.
    """
    reasons: list[str] = []
    eta_ok = eta_admissible(p.n, p.m, alpha, p.eta)
    if not eta_ok:
        reasons.append("eta inadmissible")
    if p.eta >= 1:
        reasons.append("eta >= 1")
        v = pi_ = g = _ONE
    else:
        v, pi_, g = gamma(p)
    if not p.h_valid:
        reasons.append("h >= m/2")
    if not g.hi < 1:
        reasons.append("gamma >= 1")
    lam_enc = lam(p.m, g)

    lr = log_rho(p.n, p.m, alpha, p.eta, p.d, p.epsilon)
    rho_enc = _ZERO if lr.hi == -math.inf else exp(lr)

    prelemma = False
    if eta_ok:
        prelemma = prelemma_check(p.n, p.m, p.d, alpha * dv(p.eta), log_rho_enc=lr)
        if not prelemma:
            reasons.append("prelemma failed or undecided")

    admissible = not reasons
    if admissible:
        bound, log_bound = harmonic_combination(lam_enc, lr)
    else:
        bound, log_bound = _ZERO, _NEG_INF
    return BoundCertificate(
        params=p,
        alpha=alpha,
        V=v,
        Pi=pi_,
        gamma=g,
        lam=lam_enc,
        rho=rho_enc,
        log_rho=lr,
        bound=bound,
        log_bound=log_bound,
        eta_admissible=eta_ok,
        prelemma_verified=prelemma,
        admissible=admissible,
        reasons=tuple(reasons),
    )


def decimal_text(x: float, digits: int, direction: str) -> str:
    """``x`` to ``digits`` significant digits, rounded ``"down"`` or ``"up"``.

    Used for every printed headline so no printed digit overstates what the
    enclosure certifies.
    """
    if not math.isfinite(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0"
    with localcontext() as ctx:
        ctx.prec = digits
        ctx.rounding = ROUND_FLOOR if direction == "down" else ROUND_CEILING
        d = +Decimal(x)
    return f"{d:.{digits - 1}e}" if abs(d.adjusted()) > 4 else format(d, "f")


def lower_text(value: DirectedValue, log_value: DirectedValue, digits: int = 6) -> str:
    """Certified lower value of a positive quantity known also through its log.

    Falls back to the log enclosure when ``value`` underflowed to zero.
    """
    if value.lo > 0:
        return decimal_text(value.lo, digits, "down")
    if log_value.lo == -math.inf:
        return "0"
    log10 = log_value / ln(10)
    e = math.floor(log10.lo)
    mant = exp((log10 - e) * ln(10)).lo
    if mant < 1:  # rounding put the mantissa just below 1
        e -= 1
        mant = exp((log10 - e) * ln(10)).lo
    return f"{decimal_text(mant, digits, 'down')}e{e}"


def bound_text(cert: BoundCertificate, digits: int = 6) -> str:
    return lower_text(cert.bound, cert.log_bound, digits)
