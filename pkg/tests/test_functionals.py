import math

import numpy as np
import pytest

from degenvac.errors import InvalidInput, NegativeTime, NoCrossing, OutOfDomain
from degenvac.functionals import (
    GAMMA_GE_3,
    GAMMA_LT_3,
    compute_diagnostics,
    dIdt_rhs,
    dissipation_bound,
    first_crossing,
    gamma_case,
    interval_quadrature,
    interval_weights,
    lower_envelope,
    predict_blowup_bound,
    upper_envelope,
)
from degenvac.model import FluidState, Grid, Parameters

P22 = Parameters(2.0, 2.0)
GRID = Grid(-2.0, 2.0, 800)
A = (-1.0, 1.0)
TOL = GRID.dx**2


def state(rho, u):
    x = GRID.centers
    inside = np.abs(x) < 1.0
    return FluidState(0.0, GRID, np.where(inside, rho(x), 0.0), np.where(inside, u(x), 0.0), 1e-10)


REST = state(lambda x: np.ones_like(x), lambda x: np.zeros_like(x))
STRETCH = state(lambda x: np.ones_like(x), lambda x: x)


def test_quadrature_examples():
    assert interval_quadrature(REST, A, np.ones(GRID.n_cells)) == pytest.approx(2.0, rel=1e-14)
    assert interval_quadrature(REST, A, np.zeros(GRID.n_cells)) == 0.0
    assert interval_quadrature(REST, A, GRID.centers**2) == pytest.approx(2.0 / 3.0, abs=TOL)
    assert interval_quadrature(REST, A, lambda s: s.rho) == pytest.approx(2.0, rel=1e-14)


def test_fractional_end_cells():
    w = interval_weights(REST, (-0.0025, 0.0))
    assert w.sum() == pytest.approx(0.5)
    assert interval_weights(REST, (0.3, 0.3)).sum() == 0.0
    with pytest.raises(OutOfDomain):
        interval_weights(REST, (-3.0, 0.0))
    with pytest.raises(InvalidInput):
        interval_weights(REST, (0.5, -0.5))


def test_diagnostics_at_rest():
    r = compute_diagnostics(REST, A, 0.0, P22)
    assert r.m == pytest.approx(2.0, rel=1e-14)
    assert r.M2 == pytest.approx(2.0 / 3.0, abs=TOL)
    assert r.F == 0.0
    assert r.eps == pytest.approx(2.0, rel=1e-14)
    assert r.I == pytest.approx(14.0 / 3.0, abs=TOL)
    assert r.I_alt == pytest.approx(r.I, rel=1e-14)
    assert r.sup_rho == 1.0
    assert r.area_A == pytest.approx(2.0)


def test_diagnostics_with_linear_velocity():
    r = compute_diagnostics(STRETCH, A, 0.0, P22)
    assert r.F == pytest.approx(2.0 / 3.0, abs=TOL)
    assert r.eps == pytest.approx(1.0 / 3.0 + 2.0, abs=TOL)
    assert r.dissipation == pytest.approx(2.0, rel=1e-12)


def test_derivative_rhs_examples():
    assert dIdt_rhs(REST, A, 0.0, P22) == pytest.approx(4.0, rel=1e-14)
    assert dIdt_rhs(REST, A, 0.0, Parameters(3.0, 2.0)) == 0.0
    assert dIdt_rhs(STRETCH, A, 0.0, P22) == pytest.approx(4.0, rel=1e-12)


def test_dissipation_bound_examples():
    assert dissipation_bound(2.0, 1.0, P22) == 4.0
    assert dissipation_bound(2.0, 0.0, P22) == 0.0
    assert dissipation_bound(1.0, 2.0, Parameters(2.0, 3.0)) == 16.0


def test_upper_envelope_branches():
    assert upper_envelope(3.0, 1.0, 2.0, Parameters(3.0, 2.0)) == 7.0
    assert gamma_case(Parameters(3.0, 2.0)) == GAMMA_GE_3
    assert upper_envelope(3.0, 1.0, 0.0, P22) == 4.0
    assert upper_envelope(3.0, 0.0, 1.0, Parameters(1.5, 2.0)) == pytest.approx(8.0, rel=1e-14)
    assert gamma_case(Parameters(1.5, 2.0)) == GAMMA_LT_3
    # a = 1 uses the logarithm
    assert upper_envelope(math.e - 1.0, 0.0, 1.0, P22) == pytest.approx(math.e, rel=1e-14)
    with pytest.raises(NegativeTime):
        upper_envelope(-1.0, 1.0, 1.0, P22)


def test_upper_envelope_solves_its_ode():
    # d/dt U = a U/(1+t) + M for gamma < 3
    p = Parameters(1.7, 2.0)
    a, M, h = 3.0 - 1.7, 1.3, 1e-5
    for t in (0.25, 0.5, 4.0):
        U = upper_envelope(t, 0.7, M, p)
        d = (upper_envelope(t + h, 0.7, M, p) - upper_envelope(t - h, 0.7, M, p)) / (2.0 * h)
        assert d == pytest.approx(a * U / (1.0 + t) + M, rel=1e-6)


def test_lower_envelope_examples():
    assert lower_envelope(0.0, 2.0, 2.0, P22) == 4.0
    assert lower_envelope(0.0, 2.0, 2.0, P22) <= compute_diagnostics(REST, A, 0.0, P22).I
    assert lower_envelope(1.0, 1.0, 1.0, Parameters(3.0, 2.0)) == 4.0
    with pytest.raises(InvalidInput):
        lower_envelope(0.0, 0.0, 1.0, P22)


def test_first_crossing_examples():
    t = first_crossing(lambda t: 2.0 * (1.0 + t) ** 2, lambda t: 8.0, 10.0)
    assert t == pytest.approx(1.0, rel=1e-9)
    assert first_crossing(lambda t: 2.0 * (1.0 + t) ** 2, lambda t: 2.0, 10.0) == 0.0
    with pytest.raises(NoCrossing) as info:
        first_crossing(lambda t: 1.0, lambda t: 2.0, 5.0)
    assert info.value.t_max == 5.0


def test_predict_reports_branch():
    rep = predict_blowup_bound(8.0, 0.0, 1.0, 2.0 ** (1.0 / 3.0), Parameters(3.0, 2.0), t_max=10.0)
    assert rep.gamma_case == GAMMA_GE_3 and rep.a is None
    assert rep.lower_coeff == pytest.approx(2.0)
    assert rep.t_cross == pytest.approx(1.0, rel=1e-9)
    assert not rep.crossed_at_start
    rep2 = predict_blowup_bound(3.0, 1.0, 2.0, 1.0, P22)
    assert rep2.a == 1.0 and rep2.t_cross > 0.0
    assert lower_envelope(rep2.t_cross, 2.0, 1.0, P22) == pytest.approx(
        upper_envelope(rep2.t_cross, 3.0, 1.0, P22), rel=1e-8)
    rep3 = predict_blowup_bound(1.0, 1.0, 2.0, 1.0, P22)
    assert rep3.t_cross == 0.0 and rep3.crossed_at_start
    with pytest.raises(InvalidInput):
        predict_blowup_bound(1.0, 1.0, 0.0, 1.0, P22)
