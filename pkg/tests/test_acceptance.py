"""Acceptance criteria, one marker per criterion (see the summary printed by conftest)."""

from __future__ import annotations

import math
import random
import time
from fractions import Fraction

import mpmath
import pytest

import oracles
from gm_oracles import check_frostman, oracle_content, random_set
from bourgain.engine import BoundCertificate, ParameterTuple, certify, prelemma_check
from bourgain.errors import DomainError
from bourgain.estimate import closed_form_value, select_alpha
from bourgain.netmeasure import net_content
from bourgain.rigor import DirectedValue, dv, exp, expm1, ln, log1p, pow_int, pow_real, sqrt
from bourgain.search import (
    KNOWN_MISPRINTS,
    REFERENCE_TABLE,
    SearchSpec,
    digits_match,
    large_n_preset,
    large_n_threshold,
    optimize_eta_h,
    reproduce_table,
    v_large_n,
)

ROWS3 = [r for r in REFERENCE_TABLE if r.n == 3]
ROWS4 = [r for r in REFERENCE_TABLE if r.n == 4]


def _cert(row) -> BoundCertificate:
    return certify(ParameterTuple(*row.params), select_alpha(row.n, row.m))


def _row_fields(row):
    cert = _cert(row)
    assert cert.admissible, cert.reasons
    assert closed_form_value(row.n, row.m) == Fraction(row.alpha), "alpha"
    assert cert.alpha.contains(Fraction(row.alpha))
    assert digits_match(row.gamma, cert.gamma, allow_rounding=False), ("gamma", cert.gamma)
    assert digits_match(row.rho, cert.rho), ("rho", cert.rho)
    if (row.n, row.m, "lam") not in KNOWN_MISPRINTS:
        assert digits_match(row.lam, cert.lam), ("lambda", cert.lam)
    return cert


# table reproduction ----------------------------------------------------------


@pytest.mark.acceptance("table n=3")
@pytest.mark.parametrize("row", ROWS3, ids=lambda r: f"m{r.m}")
def test_table_n3_row(row):
    _row_fields(row)


@pytest.mark.acceptance("table n=3")
def test_table_n3_runtime_and_search():
    start = time.perf_counter()
    rows = reproduce_table(SearchSpec(3, tuple(r.m for r in ROWS3)))
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    for got, ref in zip(rows, ROWS3):
        assert (got.eta, got.h, got.d) == ref.params[2:]
        assert digits_match(ref.rho, got.rho)


@pytest.mark.acceptance("table n=3")
@pytest.mark.xfail(
    strict=True,
    reason="printed lambda 2.254e-4 for m=12 is a digit transposition of the certified 2.548e-4",
)
def test_table_n3_m12_printed_lambda():
    row = next(r for r in ROWS3 if r.m == 12)
    assert digits_match(row.lam, _cert(row).lam)


@pytest.mark.acceptance("table n=3")
def test_table_n3_m12_printed_lambda_contradicts_its_row():
    # gamma printed as 0.9993... pins lambda = -log_12(gamma) to (2.41e-4, 2.82e-4)
    lo = -mpmath.log(mpmath.mpf("0.9994")) / mpmath.log(12)
    hi = -mpmath.log(mpmath.mpf("0.9993")) / mpmath.log(12)
    assert not lo < mpmath.mpf("2.254e-4") < hi
    assert lo < mpmath.mpf("2.548e-4") < hi
    row = next(r for r in ROWS3 if r.m == 12)
    assert digits_match(KNOWN_MISPRINTS[(3, 12, "lam")], _cert(row).lam, allow_rounding=False)


@pytest.mark.acceptance("table n=4")
@pytest.mark.parametrize("row", ROWS4, ids=lambda r: f"m{r.m}")
def test_table_n4_row(row):
    _row_fields(row)


@pytest.mark.acceptance("table n=4")
def test_table_n4_highlights():
    cert = _row_fields(next(r for r in ROWS4 if r.m == 11))
    assert cert.alpha.contains(Fraction("1660.53"))
    assert digits_match("2.199e-26", cert.rho, allow_rounding=False)


# headline bounds -------------------------------------------------------------


@pytest.mark.acceptance("headline bounds")
@pytest.mark.parametrize(
    "params, floor",
    [((3, 9, Fraction("0.0046"), 3, 4), 1e-15), ((4, 11, Fraction("0.00026"), 4, 5), 2e-26)],
)
def test_headline_bound(params, floor):
    n, m = params[:2]
    cert = certify(ParameterTuple(*params), select_alpha(n, m))
    assert cert.admissible and cert.eta_admissible and cert.prelemma_verified
    assert cert.gamma.hi < 1
    assert cert.bound.lo >= floor


# prelemma --------------------------------------------------------------------


@pytest.mark.acceptance("prelemma re-verification")
@pytest.mark.parametrize("row", REFERENCE_TABLE, ids=lambda r: f"n{r.n}m{r.m}")
def test_prelemma_every_row(row):
    cert = _cert(row)
    a = cert.alpha * dv(row.params[2])
    assert prelemma_check(row.n, row.m, row.d, a, cert.rho)
    assert prelemma_check(row.n, row.m, row.d, a, log_rho_enc=cert.log_rho)
    # literal form at 60 digits, at the top of the enclosures
    lhs, rhs = oracles.prelemma(row.n, row.m, row.d, Fraction(a.hi), Fraction(cert.rho.hi))
    assert lhs < rhs


# search dominance ------------------------------------------------------------


def _dominates(found: BoundCertificate, printed: BoundCertificate) -> bool:
    if found.params == printed.params:
        return True
    if found.log_bound.lo >= printed.log_bound.hi:
        return True
    same_rho = (found.params.eta, found.params.d, found.params.epsilon) == (
        printed.params.eta, printed.params.d, printed.params.epsilon)
    # equal rho: the bound increases with lambda
    return same_rho and found.lam.lo >= printed.lam.hi


@pytest.mark.acceptance("search dominance")
@pytest.mark.parametrize("row", REFERENCE_TABLE, ids=lambda r: f"n{r.n}m{r.m}")
def test_search_dominates_row(row):
    alpha = select_alpha(row.n, row.m)
    start = time.perf_counter()
    _, _, found = optimize_eta_h(row.n, row.m, alpha, row.d, 4 if row.n == 3 else 5)
    assert time.perf_counter() - start < 120
    assert found is not None and found.admissible
    assert _dominates(found, _cert(row))


# geometric measure theory ----------------------------------------------------

S_CHOICES = [Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2), Fraction(2, 3), Fraction(5, 4), Fraction(7, 4)]


@pytest.mark.acceptance("net-content oracle")
def test_net_content_matches_cover_oracle():
    rng = random.Random(20240101)
    checked = 0
    for _ in range(240):
        n = rng.choice([1, 2])
        m = rng.choice([2, 3])
        depth = rng.randint(1, 3)
        E = random_set(rng, n, m, depth)
        s = rng.choice([x for x in S_CHOICES if x <= n])
        dd = rng.randint(-1, depth)
        assert net_content(E, s, dd) == oracle_content(E, s, dd), (E, s, dd)
        checked += 1
    assert checked >= 200


@pytest.mark.acceptance("frostman properties")
def test_frostman_random_sets():
    rng = random.Random(4242)
    count = 0
    for _ in range(180):
        K = random_set(rng, 2, rng.choice([2, 3]), rng.randint(1, 3))
        check_frostman(K, rng.choice([Fraction(3, 2), Fraction(7, 4), Fraction(2)]))
        count += 1
    for _ in range(40):
        K = random_set(rng, 3, 2, rng.randint(1, 2))
        check_frostman(K, Fraction(5, 2))
        count += 1
    assert count >= 200


# large n ---------------------------------------------------------------------


@pytest.mark.acceptance("large-n preset")
def test_v_converges():
    assert abs(v_large_n(50).lo - 0.9298) < 1e-2
    assert abs(v_large_n(50).hi - 0.9298) < 1e-2


@pytest.mark.acceptance("large-n preset")
def test_large_n_admissible_certificates():
    n0 = large_n_threshold(30)
    assert n0 is not None
    for n in range(n0, 31):
        rep = large_n_preset(n)
        if not rep.admissible:
            continue
        c = rep.certificate
        assert c.prelemma_verified
        # bound = exp(log_bound) > 0; for n >= 13 it is below the double range
        assert math.isfinite(c.log_bound.lo)
        if n <= 12:
            assert c.bound.lo > 0


# rounding soundness ----------------------------------------------------------


def _random_float(rng: random.Random) -> float:
    kind = rng.random()
    if kind < 0.4:
        return rng.uniform(-100, 100)
    if kind < 0.8:
        return math.copysign(10 ** rng.uniform(-30, 30), rng.random() - 0.3)
    return float(rng.randint(-1000, 1000))


def _step(rng, enc: DirectedValue, v):
    """Apply one random certified operation; returns (enc, exact) or None if skipped."""
    op = rng.randrange(11)
    y = _random_float(rng)
    my = mpmath.mpf(y)
    if op == 0:
        return enc + y, v + my
    if op == 1:
        return enc - y, v - my
    if op == 2:
        return enc * y, v * my
    if op == 3:
        if y == 0:
            return None
        return enc / y, v / my
    if op == 4:
        if enc.lo <= 0 <= enc.hi:
            return None
        return y / enc, my / v
    if op == 5 and enc.lo >= 0:
        return sqrt(enc), mpmath.sqrt(v)
    if op == 6 and -700 < enc.lo and enc.hi < 700:
        return (exp(enc), mpmath.exp(v)) if rng.random() < 0.5 else (expm1(enc), mpmath.expm1(v))
    if op == 7 and enc.lo > 0:
        return ln(enc), mpmath.log(v)
    if op == 8 and enc.lo > -1:
        return log1p(enc), mpmath.log1p(v)
    if op == 9:
        k = rng.randint(-4, 6)
        if k < 0 and enc.lo <= 0 <= enc.hi:
            return None
        return pow_int(enc, k), v**k
    if op == 10 and enc.lo > 0:
        e = rng.uniform(-3, 3)
        return pow_real(enc, dv(e)), mpmath.power(v, mpmath.mpf(e))
    return None


@pytest.mark.acceptance("rounding soundness")
def test_randomized_chains_against_oracle():
    mpmath.mp.dps = 50
    rng = random.Random(12345)
    escapes = []
    for i in range(100_000):
        x = _random_float(rng)
        enc, v = dv(x), mpmath.mpf(x)
        for _ in range(rng.randint(1, 6)):
            try:
                nxt = _step(rng, enc, v)
            except DomainError:
                nxt = None
            if nxt is None:
                continue
            enc, v = nxt
            if not (math.isfinite(enc.lo) and math.isfinite(enc.hi)) or abs(enc.hi) > 1e200:
                break
        if not (mpmath.mpf(enc.lo) <= v <= mpmath.mpf(enc.hi)):
            escapes.append((i, enc, v))
    mpmath.mp.dps = 60
    assert not escapes, escapes[:5]
