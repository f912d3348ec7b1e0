import math

import numpy as np
import pytest
import sympy as sp

from degenvac.errors import InsufficientLevels, InvalidInput
from degenvac.model import FluidState, Grid, Parameters
from degenvac.verify import (
    ANCHORS,
    ManufacturedSolution,
    T,
    X,
    VerificationReport,
    convergence_study,
    default_mms,
    mms_error,
    mms_residual,
    run_invariant_suite,
)

from tests._shared import MMS_LEVELS, PARAMS, mms_errors, reference_setup


def test_static_state_has_zero_residuals():
    sol = ManufacturedSolution(sp.Rational(7, 3), sp.Integer(0))
    assert mms_residual(sol, 0.2, 0.4, PARAMS) == (0.0, 0.0)


@pytest.mark.parametrize("gamma, delta", [(2.0, 2.0), (1.4, 3.3), (5.0, 1.2)])
def test_exponential_density_linear_velocity(gamma, delta):
    sol = ManufacturedSolution(sp.exp(T), -X)
    x = np.array([-1.0, 0.25, 2.0])
    cont, mom = mms_residual(sol, 0.7, x, Parameters(gamma, delta))
    assert np.all(cont == 0.0)
    assert np.allclose(mom, x * math.exp(0.7), rtol=1e-14, atol=0.0)


def test_exact_partials_are_available():
    sol = default_mms()
    assert sp.simplify(sol.derivative("rho", "t") + sol.derivative("rho", "x") / 2) == 0
    assert sp.simplify(sol.derivative("u", "t") + sol.u_expr - sp.Rational(2, 5)) == 0


def test_default_mms_stays_positive():
    sol = default_mms()
    assert sol.check_positive(Grid(-1.0, 1.0, 200), 0.0, 0.1) >= 0.4 - 1e-12


def test_negative_manufactured_density_rejected():
    sol = ManufacturedSolution(sp.sin(sp.pi * X), sp.Integer(0), window=(0.0, 0.1, -1.0, 1.0))
    with pytest.raises(InvalidInput):
        mms_error(sol, 50, PARAMS)


def test_source_reproduces_manufactured_solution():
    # with exact sources the scheme error is pure truncation error
    e = mms_error(default_mms(), 100, PARAMS)
    assert e["rho"] < 5e-3 and e["u"] < 2e-3


def test_mms_order_across_three_levels():
    errs = mms_errors(MMS_LEVELS)
    orders = [math.log2(a["rho"] / b["rho"]) for a, b in zip(errs[:-1], errs[1:])]
    assert all(abs(o - 1.0) <= 0.2 for o in orders), orders


def test_zero_data_suite_passes_with_zero_measurements():
    rep = run_invariant_suite(reference_setup(200, initial="zero"))
    assert rep.passed
    assert all(c.measured == 0.0 for c in rep.checks)


def test_suite_covers_every_invariant_once_with_anchor():
    rep = run_invariant_suite(reference_setup(200, initial="zero"))
    names = [c.name for c in rep.checks]
    assert len(names) == len(set(names))
    assert set(names) == set(ANCHORS)
    assert all(c.anchor for c in rep.checks)


def test_suite_is_deterministic():
    s = reference_setup(300, t_final=0.2, n_samples=11)
    assert run_invariant_suite(s).to_json() == run_invariant_suite(s).to_json()


def _inject_mass(state):
    rho = state.rho.copy()
    rho[np.argmax(rho)] += 0.5
    return FluidState(state.t, state.grid, rho, state.u, state.rho_vac)


def test_mass_injection_is_caught():
    s = reference_setup(300, t_final=0.2, n_samples=11)
    clean = run_invariant_suite(s)
    dirty = run_invariant_suite(s, tamper=(0.1, _inject_mass))
    by_name = {c.name: c for c in dirty.checks}
    assert {c.name: c for c in clean.checks}["global_mass"].passed
    assert not by_name["global_mass"].passed
    assert not by_name["group_mass"].passed
    assert not dirty.passed


def test_report_serialisations():
    rep = VerificationReport("demo")
    rep.add("a", "x = x", 0.5, 1.0)
    rep.add("b", "y = y", 2.0, 3.0, lower=2.5)
    rep.orders["o"] = [1.0, 0.9]
    text = rep.to_text()
    assert "PASS a" in text and "FAIL b" in text and text.endswith("overall: FAIL\n")
    assert '"passed": false' in rep.to_json()
    assert [c.name for c in rep.failed()] == ["b"]


def test_nan_measurement_fails():
    rep = VerificationReport("nan")
    assert not rep.add("n", "-", float("nan"), 1.0).passed


def test_convergence_study_needs_three_doubling_levels():
    s = reference_setup(200)
    with pytest.raises(InsufficientLevels):
        convergence_study(s, [200, 400])
    with pytest.raises(InsufficientLevels):
        convergence_study(s, [200, 300, 400])


def test_convergence_study_zero_state_residuals_vanish():
    rep = convergence_study(reference_setup(50, initial="zero"), [50, 100, 200], include_mms=False)
    for key in ("energy_residual", "derivative_mismatch", "path_residual"):
        assert rep.margins[key] == [0.0, 0.0, 0.0]
    assert rep.passed


def test_energy_residual_halves_per_level_on_reference_data():
    rep = convergence_study(reference_setup(200), [200, 400, 800], include_mms=False)
    ratios = rep.orders["energy_residual_decay"]
    assert all(1.5 <= r <= 3.0 for r in ratios), ratios
    assert rep.passed


@pytest.mark.slow
def test_reference_suite_passes_at_reference_resolution():
    from tests._shared import REFINEMENT_PAIR, reference_suite

    coarse, fine = (reference_suite(n) for n in REFINEMENT_PAIR)
    failed = [c.name for c in fine.checks if not c.passed]
    assert not failed, failed
    # measured residuals shrink with resolution
    for c0, c1 in zip(coarse.checks, fine.checks):
        if c0.measured > 0.0 and c0.lower is None:
            assert c1.measured <= c0.measured, c0.name
