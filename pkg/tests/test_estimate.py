from __future__ import annotations

from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from bourgain.errors import ConfigError, ScanRangeError
from bourgain.estimate import (
    EstimateConfig,
    alpha3,
    alpha3_raw,
    alpha4,
    alpha4_raw,
    alpha_for_range,
    alpha_general,
    ceil_significant,
    check_dimensions,
    closed_form_value,
    geometry_ok,
    o_min,
    o_value,
    select_alpha,
    unit_ball_volume,
    xi,
)
from bourgain.rigor import dv

ALPHA3 = {5: "303.102", 6: "277.560", 7: "83.8178", 8: "81.9976", 9: "60.8979",
          10: "61.4480", 11: "54.2657", 12: "55.5835", 13: "52.5339", 14: "54.1918"}
ALPHA4 = {7: "2409.54", 8: "2425.26", 9: "1813.48", 10: "1834.77", 11: "1660.53",
          12: "1685.89", 13: "1619.82", 14: "1649.02", 15: "1626.75", 16: "1659.76"}


def within(enc, x) -> bool:
    return mpmath.mpf(enc.lo) <= x <= mpmath.mpf(enc.hi)


@pytest.mark.parametrize("m, expected", [(5, 1), (6, 2), (2, 2), (9, 1)])
def test_xi(m, expected):
    assert xi(m) == expected


def test_geometry_condition():
    assert geometry_ok(3, 5)  # 4**2 > 12
    assert not geometry_ok(4, 6)  # 4**2 == 16 is not > 16
    assert geometry_ok(4, 7)
    with pytest.raises(ConfigError, match="config"):
        check_dimensions(4, 6)
    with pytest.raises(ConfigError):
        EstimateConfig(2, 9, Fraction(3, 2))
    with pytest.raises(ConfigError):
        EstimateConfig(3, 9, Fraction(2))  # s must exceed n - 1


@pytest.mark.parametrize("n", range(1, 21))
def test_unit_ball_volume(n):
    enc = unit_ball_volume(n)
    assert within(enc, oracles.ball_volume(n))
    assert enc.rel_width < 1e-14


@pytest.mark.parametrize("m", sorted(ALPHA3))
def test_alpha3_table_values(m):
    assert closed_form_value(3, m) == Fraction(ALPHA3[m])
    assert alpha3(m).contains(Fraction(ALPHA3[m]))


@pytest.mark.parametrize("m", sorted(ALPHA4))
def test_alpha4_table_values(m):
    assert closed_form_value(4, m) == Fraction(ALPHA4[m])
    assert alpha4(m).contains(Fraction(ALPHA4[m]))


@pytest.mark.parametrize("m", range(5, 31))
def test_closed_forms_against_oracle(m):
    raw = alpha3_raw(m)
    assert within(raw, oracles.alpha3_raw(m))
    assert raw.rel_width < 1e-8
    if m >= 7:
        assert within(alpha4_raw(m), oracles.alpha4_raw(m))


def test_ceil_significant():
    assert ceil_significant(1660.5238) == Fraction("1660.53")
    assert ceil_significant(60.89780774) == Fraction("60.8979")
    assert ceil_significant(277.5) == Fraction("277.5")  # exact double stays put
    assert ceil_significant(277.56) == Fraction("277.561")  # the double is just above 277.56
    assert ceil_significant(0.00123456789) == Fraction("0.00123457")


def test_closed_form_domain():
    with pytest.raises(ConfigError):
        alpha3(4)
    with pytest.raises(ConfigError):
        alpha4(6)


def test_o_value_examples():
    v = o_value(EstimateConfig(3, 9, Fraction("2.999999")), 1)
    expected = 18 / mpmath.sqrt(3) + 27 * mpmath.pi * mpmath.mpf(9) ** oracles.mpf("-0.999999") / (
        1 - mpmath.mpf(9) ** oracles.mpf("-1.999999"))
    assert within(v, expected)
    v = o_value(EstimateConfig(3, 9, Fraction(3)), 1)
    assert within(v, 18 / mpmath.sqrt(3) + 27 * mpmath.pi / 9 / (1 - mpmath.mpf(1) / 81))
    # n=4: the minimand at k=1 is exactly the bracket of the closed form
    v = o_value(EstimateConfig(4, 11, Fraction("3.999999")), 1)
    bracket = mpmath.mpf(121) / 4 + 32 * mpmath.pi**2 * mpmath.mpf(11) ** oracles.mpf("0.000001") / (
        1 - mpmath.mpf(11) ** oracles.mpf("-1.999999"))
    assert within(v, bracket)


def test_o_min_argmin_and_bracketing():
    _, k = o_min(EstimateConfig(3, 9, Fraction("2.999999"), (-10, 10)))
    assert k == 1
    o, k = o_min(EstimateConfig(10, 10, Fraction("9.5"), (-10, 10)))
    assert within(o, min(oracles.minimand(10, 10, j, "9.5") for j in range(-10, 11)))


def test_scan_range_too_small():
    with pytest.raises(ScanRangeError, match="scan range too small"):
        o_min(EstimateConfig(3, 9, Fraction("2.999999"), (3, 6)))


def test_auto_widening():
    o, k = o_min(EstimateConfig(3, 9, Fraction(3)))
    assert k == 1


@pytest.mark.parametrize("n, m, s", [(3, 9, "2.999999"), (4, 11, "3.999999"), (5, 9, "4.6"), (10, 10, "9.5")])
def test_o_min_unimodal(n, m, s):
    cfg = EstimateConfig(n, m, Fraction(s), (-10, 10))
    _, k0 = o_min(cfg)
    vals = {k: o_value(cfg, k) for k in range(-10, 11)}
    for k in range(-10, k0):
        assert vals[k].lo > vals[k + 1].hi
    for k in range(k0, 10):
        assert vals[k + 1].lo > vals[k].hi


@pytest.mark.parametrize("m", range(5, 31))
def test_general_no_worse_than_closed_form_n3(m):
    g = alpha_general(EstimateConfig(3, m, Fraction("2.999999")))
    assert g.hi <= alpha3(m).hi + 1e-4


@pytest.mark.parametrize("m", range(7, 31))
def test_general_no_worse_than_closed_form_n4(m):
    g = alpha_general(EstimateConfig(4, m, Fraction("3.999999")))
    assert g.hi <= alpha4(m).hi + 1e-4


def test_general_examples():
    assert alpha_general(EstimateConfig(3, 9, Fraction("2.999999"))).hi <= 60.8979
    assert alpha_general(EstimateConfig(4, 11, Fraction("3.999999"))).hi <= 1660.53


def test_general_grows_linearly_in_m():
    a3 = alpha_general(EstimateConfig(3, 1000, Fraction(3)))
    a4 = alpha_general(EstimateConfig(3, 10000, Fraction(3)))
    assert 9.5 < a4.lo / a3.hi and a4.hi / a3.lo < 10.5


@settings(max_examples=60, deadline=None)
@given(
    st.sampled_from([(3, 9), (3, 14), (4, 11), (5, 9), (6, 12), (8, 12)]),
    st.integers(min_value=-4, max_value=4),
    st.fractions(min_value=0, max_value=1, max_denominator=1000),
)
def test_minimand_against_oracle(nm, k, frac):
    n, m = nm
    s = n - 1 + Fraction(1, 1000) + frac * Fraction(999, 1000)
    enc = o_value(EstimateConfig(n, m, s), k)
    assert within(enc, oracles.minimand(n, m, k, s))


@settings(max_examples=40, deadline=None)
@given(
    st.sampled_from([(3, 9), (4, 11), (5, 10), (7, 11)]),
    st.fractions(min_value=Fraction(1, 10**6), max_value=Fraction(1, 2), max_denominator=10**6),
    st.fractions(min_value=0, max_value=1, max_denominator=100),
)
def test_range_alpha_dominates_every_s(nm, eps, t):
    n, m = nm
    s = n - eps * t
    if s <= n - eps:
        s = n - eps * Fraction(99, 100)
    rng, _ = alpha_for_range(n, m, eps)
    assert rng.hi >= float(oracles.alpha_at(n, m, s))


def test_range_alpha_values():
    a, k = alpha_for_range(4, 11, Fraction(1, 10**6))
    assert k == 1 and 1660.52 < a.lo < a.hi < 1660.53
    a, k = alpha_for_range(11, 11, Fraction(1, 2))
    assert k == 2
    assert within(a, max(oracles.alpha_at(11, 11, s) for s in ("10.5", "11")))


def test_select_alpha():
    assert select_alpha(3, 9).contains(Fraction("60.8979"))
    g = select_alpha(3, 9, "general")
    assert g.hi < 60.8979
    with pytest.raises(ConfigError):
        select_alpha(3, 9, "closed", Fraction(1, 2))
    with pytest.raises(ConfigError):
        select_alpha(3, 9, "other")
