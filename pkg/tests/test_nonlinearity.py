from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from bubbletower import DomainError, RangeError, NonlinearitySpec, check_H1, eval_F, eval_log_f, eval_log_f_prime
from bubbletower.nonlinearity import H4, LogValue, PowerExp, UnitH, h4, power_exp, unit_h


def test_unit_h_at_zero_is_one():
    lv = eval_log_f(unit_h(1.0), 0.0)
    assert lv.log_abs == 0.0 and lv.sign == 1
    assert lv.value == 1.0


def test_h4_closed_form_at_two():
    # independent arithmetic: log(8/9) - 5 log 2 + 8
    expected = math.log(8.0 / 9.0) - 5.0 * math.log(2.0) + 8.0
    assert eval_log_f(h4(3.0), 2.0).log_abs == pytest.approx(expected, abs=1e-13)
    assert expected == pytest.approx(4.41648, abs=1e-5)


def test_power_exp_m1():
    assert eval_log_f(power_exp(2.0, 1.0, q=1.0), 3.0).log_abs == pytest.approx(math.log(3.0) + 9.0, abs=1e-13)


def test_log_f_prime_examples():
    assert eval_log_f_prime(unit_h(1.0), 1.0).log_abs == pytest.approx(1.0, abs=1e-14)
    assert eval_log_f_prime(unit_h(2.0), 2.0).log_abs == pytest.approx(math.log(4.0) + 4.0, abs=1e-13)


def test_log_f_prime_matches_finite_difference():
    for spec, t in ((h4(3.0), 2.0), (h4(3.0), 0.4), (power_exp(2.5, -1.0, alpha=0.3, q=1.5), 0.7), (unit_h(1.5), 1.3)):
        h = 1e-6
        fd = (math.exp(spec.log_f(t + h)) - math.exp(spec.log_f(t - h))) / (2 * h)
        assert eval_log_f_prime(spec, t).value == pytest.approx(fd, rel=1e-7)


def test_eval_F_examples():
    assert eval_F(unit_h(1.0), 1.0) == pytest.approx(math.e - 1.0, rel=1e-12)
    assert eval_F(h4(3.0), 0.0) == 0.0
    assert eval_F(unit_h(2.0), 1.0) == pytest.approx(1.4626517459071816, rel=1e-10)


def test_eval_F_matches_independent_quadrature():
    spec = h4(3.0)
    oracle, _ = quad(lambda s: math.exp(spec.log_f(s)), 0.0, 1.7, epsabs=0, epsrel=1e-13, limit=200, points=[1.0])
    assert eval_F(spec, 1.7) == pytest.approx(oracle, rel=1e-9)


def test_eval_F_range_error():
    with pytest.raises(RangeError):
        eval_F(h4(3.0), 10.0)


def test_log_f_range_error():
    with pytest.raises(RangeError):
        eval_log_f(unit_h(3.0), 1e3)


def test_negative_t_rejected():
    with pytest.raises(DomainError):
        eval_log_f(unit_h(1.0), -1.0)


def test_h1_examples():
    assert np.all(check_H1(unit_h(2.0), [1.0, 10.0, 100.0]).ratio == 0.0)
    r = check_H1(power_exp(2.0, 1.0), [100.0])
    assert r.ratio[0] == pytest.approx(1e-4, rel=1e-12)
    # h = c t^(1-2p) gives h'/h = (1-2p)/t, so the ratio is (1-2p)/t^p
    r = check_H1(h4(3.0), [10.0])
    assert r.ratio[0] == pytest.approx(-5.0 / 1000.0, rel=1e-12)


def test_h1_decays_for_all_variants():
    grid = np.geomspace(2.0, 200.0, 30)
    for spec in (unit_h(3.0), power_exp(3.0, 2.0, alpha=1.0, q=2.0), h4(3.0), h4(4.0, tau0=1.5)):
        assert check_H1(spec, grid).decaying


def test_validation():
    with pytest.raises(DomainError):
        h4(2.0)
    with pytest.raises(DomainError):
        power_exp(2.0, 1.0, q=2.0)
    with pytest.raises(DomainError):
        power_exp(3.0, -1.0, t_join=0.0)
    with pytest.raises(DomainError):
        NonlinearitySpec(-1.0)


def test_dict_round_trip_and_unknown_keys():
    for spec in (unit_h(1.0), power_exp(3.0, 1.5, alpha=0.2, q=2.0), h4(3.0, tau0=0.8)):
        assert NonlinearitySpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(DomainError):
        NonlinearitySpec.from_dict({"p": 3, "variant": "H4", "bogus": 1})


def test_log_value_from_float():
    lv = LogValue.from_float(-2.5)
    assert lv.sign == -1 and lv.value == pytest.approx(-2.5)


@given(t=st.floats(0.0, 3.0), p=st.floats(2.05, 6.0), tau0=st.floats(0.3, 2.0))
@settings(max_examples=60, deadline=None)
def test_h4_blend_positive_and_continuous(t, p, tau0):
    spec = NonlinearitySpec(p, H4(tau0))
    assert math.isfinite(spec.log_f(t))
    # C1 join at tau0
    lo, hi = spec.log_f(tau0 - 1e-9), spec.log_f(tau0 + 1e-9)
    assert abs(lo - hi) < 1e-6


@given(t=st.floats(1e-3, 4.0), p=st.floats(0.5, 5.0))
@settings(max_examples=60, deadline=None)
def test_log_f_derivative_tends_to_exponent_rate(t, p):
    # f'/f - p t^(p-1) is exactly h'/h; for UnitH that is zero
    spec = NonlinearitySpec(p, UnitH())
    assert spec.dlog_f(t) == pytest.approx(p * t ** (p - 1.0), rel=1e-12, abs=1e-300)


@given(t=st.floats(0.0, 2.0))
@settings(max_examples=40, deadline=None)
def test_F_monotone(t):
    spec = h4(3.0)
    assert eval_F(spec, t + 0.1) > eval_F(spec, t)


def test_power_exp_variant_fields():
    spec = NonlinearitySpec(3.0, PowerExp(m=-1.0, alpha=0.0, q=1.0), t_join=1.0)
    assert spec.m_exponent == -1.0
    assert NonlinearitySpec(3.0, H4()).m_exponent == -5.0
