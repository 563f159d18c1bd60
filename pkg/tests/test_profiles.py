from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from bubbletower import DomainError, Tabulated, UBeta, VL, compute_recurrence, eval_curve, eval_profile
from bubbletower import phi_of_profile, profile_mass, profile_residual
from bubbletower.profiles import profile_table, regular0, singular, tilde0

A1 = compute_recurrence(3.0, 2)[1].a


def test_regular0_boundary_value():
    z, z1, _ = eval_profile(regular0(), 0.0)
    assert z == pytest.approx(0.0, abs=1e-15)
    assert z1 == 0.0


def test_singular_normalization():
    prof = singular(A1)
    z, _, _ = eval_profile(prof, A1 / math.sqrt(2.0))
    assert z == pytest.approx(0.0, abs=1e-12)


def test_tilde0_values_at_sqrt2():
    z, z1, _ = eval_profile(tilde0(), math.sqrt(2.0))
    assert z == pytest.approx(0.0, abs=1e-14)
    assert z1 == pytest.approx(-math.sqrt(2.0), abs=1e-14)


def test_masses():
    assert profile_mass(regular0()) == pytest.approx(4.0, abs=1e-8)
    assert profile_mass(tilde0()) == pytest.approx(4.0, abs=1e-8)
    assert profile_mass(singular(A1)) == pytest.approx(2 * A1, abs=1e-8)
    assert 2 * A1 == pytest.approx(2.9282, abs=1e-4)


def test_mass_against_radial_quadrature():
    # independent route: integrate e^z r dr directly in r
    prof = singular(0.8)
    oracle = sum(
        quad(lambda r: math.exp(float(eval_profile(prof, r)[0])) * r, lo, hi, epsrel=1e-12, limit=400)[0]
        for lo, hi in ((1e-300, 1.0), (1.0, 1e3), (1e3, np.inf))
    )
    assert profile_mass(prof) == pytest.approx(oracle, rel=1e-8)


def test_residual_examples():
    assert abs(float(profile_residual(regular0(), 1.0))) < 1e-12
    assert abs(float(profile_residual(singular(0.5), 1e3))) < 1e-10
    assert abs(float(profile_residual(tilde0(), 1e-3))) < 1e-10


def test_residual_unscaled_finite_difference():
    # second derivative by central differences, independent of the analytic forms
    for prof in (regular0(), singular(1.3)):
        r, h = 0.7, 1e-4
        z = lambda x: float(eval_profile(prof, x)[0])
        z2 = (z(r + h) - 2 * z(r) + z(r - h)) / h**2
        z1 = (z(r + h) - z(r - h)) / (2 * h)
        assert -z2 - z1 / r - math.exp(z(r)) == pytest.approx(0.0, abs=1e-6)
        assert float(profile_residual(prof, r, scaled=False)) == pytest.approx(0.0, abs=1e-11)


def test_density_maxima():
    assert float(phi_of_profile(regular0(), 2 * math.sqrt(2.0))) == pytest.approx(2.0, abs=1e-14)
    assert float(phi_of_profile(regular0(), 0.0)) == 0.0
    for a in (0.3, A1, 1.9):
        prof = singular(a)
        R = np.geomspace(1e-3, 1e3, 20001)
        assert np.max(phi_of_profile(prof, R)) == pytest.approx(a * a / 2, rel=1e-6)
        assert float(phi_of_profile(prof, math.exp(prof.s_peak))) == pytest.approx(a * a / 2, rel=1e-14)


def test_large_k_profile_approaches_log():
    t = compute_recurrence(3.0, 64)
    r = np.geomspace(0.1, 10.0, 401)

    def sup(k):
        a = t[k].a
        z = eval_profile(singular(a), r)[0]
        return np.max(np.abs(z - math.log(a * a / 2) - 2 * np.log(1 / r)))

    assert sup(50) < sup(10)


def test_curves():
    assert eval_curve(UBeta(2.0, 3.0), -0.5) == pytest.approx(1.0, abs=1e-15)
    assert eval_curve(UBeta(2.0, 3.0), -1e-300) < 1e-99
    v = VL(0.0, 3.0, -5.0)
    assert v.kappa == pytest.approx(-1.0)
    assert eval_curve(v, -8.0) == pytest.approx((16.0 + math.log(16.0)) ** (1 / 3), abs=1e-14)
    assert eval_curve(v, -8.0) == pytest.approx(2.65771, abs=1e-5)
    with pytest.raises(DomainError):
        eval_curve(UBeta(2.0, 3.0), 0.5)
    with pytest.raises(DomainError):
        eval_curve(v, -0.25)


def test_tabulated_curve():
    s = np.linspace(-5, 0, 50)
    tab = Tabulated(s, np.sqrt(-s))
    assert eval_curve(tab, -2.0) == pytest.approx(math.sqrt(2.0), rel=1e-3)
    with pytest.raises(DomainError):
        tab.value(-6.0)


def test_profile_table_format():
    text = profile_table(regular0(), np.arange(-2, 3) * 0.5)
    lines = text.splitlines()
    assert lines[0] == "s,z,zprime,residual"
    row = lines[3].split(",")
    assert float(row[0]) == 0.0
    assert float(row[1]) == pytest.approx(math.log(64.0 / 81.0), abs=1e-15)


def test_invalid_profiles():
    with pytest.raises(DomainError):
        singular(2.0)
    with pytest.raises(DomainError):
        eval_profile(singular(1.0), 0.0)


@given(a=st.floats(0.05, 1.95))
@settings(max_examples=20, deadline=None)
def test_mass_closed_form(a):
    assert profile_mass(singular(a)) == pytest.approx(2 * a, abs=1e-8)


@given(a=st.floats(0.05, 1.95), s=st.floats(-300.0, 300.0))
@settings(max_examples=100, deadline=None)
def test_residual_scaled_at_rounding(a, s):
    assert abs(float(profile_residual(singular(a), math.exp(s)))) < 1e-10
