"""Finite-volume simulation and diagnostics for 1D isentropic compressible
flow with density-degenerate viscosity and vacuum."""

from .config import RunConfig, parse_config
from .errors import *  # noqa: F401,F403
from .functionals import (
    BlowUpReport,
    DiagnosticsRecord,
    compute_diagnostics,
    dIdt_rhs,
    first_crossing,
    lower_envelope,
    predict_blowup_bound,
    upper_envelope,
)
from .kernels import BACKEND
from .lagrangian import FlowInterval, ParticlePath, density_bound_constant, monotone_quantity, xi_field
from .model import FluidState, Grid, IsolatedMassGroupSpec, Parameters, build_isolated_mass_group
from .runner import Setup, simulate
from .scheme import SchemeConfig, StepReport, advance_to, cfl_dt, step
from .verify import ManufacturedSolution, VerificationReport, convergence_study, mms_residual, run_invariant_suite

__version__ = "0.1.0"
