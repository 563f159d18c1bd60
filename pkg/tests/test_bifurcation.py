from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import jn_zeros, j0

from bubbletower import DomainError, SolverOptions, build_singular_solution, count_lambda_crossings, h4, kaplan_check
from bubbletower import trace_diagram, unit_h
from bubbletower.bifurcation import Diagram, DiagramRow, bessel_j0, bessel_j0_first_zero, singular_core_residual
from bubbletower.nonlinearity import power_exp


@pytest.fixture(scope="module")
def sing():
    return build_singular_solution(h4(3.0))


@pytest.fixture(scope="module")
def diagram(sing):
    return trace_diagram(h4(3.0), np.linspace(2.0, 6.0, 17), singular=sing)


def test_singular_initial_data(sing):
    s0 = sing.s_R0
    assert s0 == -0.5
    assert float(sing.value(s0)) == pytest.approx(1.0, abs=1e-15)
    assert float(sing.slope(s0)) == pytest.approx(-2.0 / 3.0, abs=1e-15)
    # continuity of the numerical branch with the closed form
    assert float(sing.value(s0 + 1e-9)) == pytest.approx(1.0, abs=1e-8)


def test_singular_core_exact(sing):
    s = np.linspace(math.log(1e-8), sing.s_R0, 2000)
    assert np.max(np.abs(singular_core_residual(sing, s))) < 1e-9


def test_singular_core_by_finite_differences(sing):
    # independent of the analytic second derivative
    r, h = 0.3, 1e-4
    U = lambda x: float(sing.value(math.log(x)))
    lap = (U(r + h) - 2 * U(r) + U(r - h)) / h**2 + (U(r + h) - U(r - h)) / (2 * h * r)
    assert -lap == pytest.approx(math.exp(h4(3.0).log_f(U(r))), rel=1e-6)


def test_lambda_star_stable(sing):
    coarse = build_singular_solution(h4(3.0), SolverOptions(rel_tol=1e-8))
    assert abs(coarse.R_bar_star - sing.R_bar_star) < 1e-7
    assert abs(coarse.lambda_star - sing.lambda_star) < 1e-6 * sing.lambda_star
    assert float(sing.value(sing.s_bar_star)) == pytest.approx(0.0, abs=1e-10)


def test_singular_requires_h4():
    with pytest.raises(DomainError):
        build_singular_solution(unit_h(3.0))


def test_singular_csv(sing):
    lines = sing.to_csv().splitlines()
    assert lines[0] == "s,U,dUds"
    assert len(lines) == sing.s.size + 1


def test_gelfand_diagram_turns_once():
    mus = np.linspace(0.2, 5.0, 25)
    d = trace_diagram(unit_h(1.0), mus)
    lam = d.column("lam")
    assert np.allclose(lam, [8 * math.expm1(m / 2) / (1 + math.expm1(m / 2)) ** 2 for m in mus], rtol=1e-6)
    i = int(np.argmax(lam))
    assert 0 < i < lam.size - 1
    assert np.all(np.diff(lam[: i + 1]) > 0) and np.all(np.diff(lam[i:]) < 0)
    assert lam.max() == pytest.approx(2.0, abs=2e-3)
    assert d.lambda_star is None


def test_h4_diagram_oscillates(diagram):
    cross = count_lambda_crossings(diagram)
    assert cross.count >= 2
    assert all(2.0 < m < 6.0 for m in cross.mus)
    Z = diagram.column("Z")
    assert np.all(np.diff(Z) >= 0) and Z.max() >= 3
    lam = diagram.column("lam")
    assert lam.min() >= diagram.lambda_star / 4 and lam.max() <= 4 * diagram.lambda_star


def test_diagram_refined_near_crossings(diagram):
    mus = diagram.column("mu")
    lam = diagram.column("lam") - diagram.lambda_star
    for i in np.nonzero(lam[:-1] * lam[1:] < 0)[0]:
        assert mus[i + 1] - mus[i] <= 0.05


def test_diagram_deterministic_and_order_stable(sing):
    grid = np.linspace(3.0, 4.0, 5)
    a = trace_diagram(h4(3.0), grid, singular=sing)
    b = trace_diagram(h4(3.0), grid, singular=sing)
    c = trace_diagram(h4(3.0), grid, singular=sing, jobs=2)
    assert a.to_csv() == b.to_csv() == c.to_csv()
    assert a.to_csv().splitlines()[0] == "mu,lambda,Z,bubbles"


def test_ceiling_rows_recorded(sing):
    d = trace_diagram(h4(3.0), [5.0, 7.0], singular=sing, refine_dx=None)
    assert [r.status for r in d.rows] == ["ok", "beyond_ceiling"]
    assert d.summary()["points"][1]["status"] == "beyond_ceiling"


def test_diagram_grid_validation():
    with pytest.raises(DomainError):
        trace_diagram(unit_h(1.0), [2.0, 1.0])


def _synthetic(values, lam_star=1.0):
    rows = tuple(DiagramRow(float(i), v, None, None, "ok") for i, v in enumerate(values))
    return Diagram(unit_h(1.0), rows, lam_star)


def test_crossings_synthetic():
    assert count_lambda_crossings(_synthetic([1.1, 1.2, 1.3]), refine=False).count == 0
    eps = 1e-3
    alt = [1 + eps, 1 - eps, 1 + eps, 1 - eps, 1 + eps]
    rep = count_lambda_crossings(_synthetic(alt), refine=False)
    assert rep.count == 4
    assert rep.mus == pytest.approx((0.5, 1.5, 2.5, 3.5))


@given(st.lists(st.floats(0.5, 1.5).filter(lambda v: v != 1.0), min_size=2, max_size=30))
@settings(max_examples=50, deadline=None)
def test_crossings_count_sign_changes(values):
    expected = sum((a - 1.0) * (b - 1.0) < 0 for a, b in zip(values[:-1], values[1:]))
    assert count_lambda_crossings(_synthetic(values), refine=False).count == expected


def test_bessel_series_against_scipy():
    for x in (0.0, 0.5, 1.7, 2.4, 3.3):
        assert bessel_j0(x) == pytest.approx(float(j0(x)), abs=1e-14)
    z = bessel_j0_first_zero()
    assert z == pytest.approx(float(jn_zeros(0, 1)[0]), abs=1e-13)
    assert z**2 == pytest.approx(5.783186, abs=1e-6)


def test_kaplan_gelfand():
    rep = kaplan_check(unit_h(1.0), [2.0])
    assert rep.c == pytest.approx(math.e, rel=1e-10)
    assert rep.t_min == pytest.approx(1.0, abs=1e-6)
    assert rep.bound == pytest.approx(5.783186 / math.e, abs=1e-5)
    assert rep.ok


def test_kaplan_h2_violated():
    # f = t^2 e^(t^2): f(0) = 0 and f(t)/t -> 0
    rep = kaplan_check(power_exp(2.0, 2.0, q=1.0, t_join=0.0), [1.0])
    assert not rep.h2_holds and rep.bound is None and rep.ok is None


def test_kaplan_h4_diagram(diagram):
    rep = kaplan_check(h4(3.0), diagram)
    assert rep.h2_holds and rep.ok
