"""Explicit finite-volume evolution with a degenerate viscous flux.

First-order Rusanov convective flux, central viscous face flux, upwind
Burgers transport of velocity in vacuum cells, Heun (SSP-RK2) in time.
Density is kept non-negative by clipping; any mass added that way and any
mass crossing the two boundary faces are reported so the discrete mass
balance closes to round-off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import kernels
from .errors import CflViolation, EmptyState, InvalidInput, NegativeDensity, NonFiniteValue, NonMonotoneTarget
from .model import FluidState, Parameters, pressure, sound_speed

# (t, x) -> (s_rho, s_mom)
SourceFn = Callable[[float, np.ndarray], tuple[np.ndarray, np.ndarray]]
# t -> (rho_left, u_left, rho_right, u_right)
GhostFn = Callable[[float], tuple[float, float, float, float]]

_DT_SLACK = 1e-12


@dataclass(frozen=True)
class SchemeConfig:
    cfl: float = 0.4
    rho_vac: float = 1e-10
    dt_max: float = 1e-2
    positivity_policy: str = "clip-and-account"
    boundary: str = "zero"

    def __post_init__(self):
        if not 0.0 < self.cfl <= 1.0:
            raise InvalidInput(f"cfl must lie in (0, 1], got {self.cfl}")
        if not self.rho_vac > 0.0:
            raise InvalidInput(f"rho_vac must be positive, got {self.rho_vac}")
        if not self.dt_max > 0.0:
            raise InvalidInput(f"dt_max must be positive, got {self.dt_max}")
        if self.positivity_policy != "clip-and-account":
            raise InvalidInput(f"unsupported positivity policy {self.positivity_policy!r}")
        if self.boundary != "zero":
            raise InvalidInput(f"unsupported boundary {self.boundary!r}")


@dataclass(frozen=True)
class StepReport:
    dt: float
    mass_defect: float
    max_wave_speed: float
    boundary_outflow: float = 0.0
    # intermediate Heun stage, consumed by the particle tracer
    stage: FluidState | None = field(default=None, repr=False, compare=False)


def convective_flux(state_left, state_right, params: Parameters) -> tuple[float, float]:
    """Rusanov flux between conserved states ``(rho, rho*u)``."""
    rl, ml = (float(v) for v in state_left)
    rr, mr = (float(v) for v in state_right)
    if rl < 0.0 or rr < 0.0:
        raise NegativeDensity("face states must have non-negative density")
    ul = ml / rl if rl > 0.0 else 0.0
    ur = mr / rr if rr > 0.0 else 0.0
    s = max(abs(ul) + sound_speed(rl, params), abs(ur) + sound_speed(rr, params))
    fl = (ml, ml * ul + pressure(rl, params))
    fr = (mr, mr * ur + pressure(rr, params))
    return (
        0.5 * (fl[0] + fr[0]) - 0.5 * s * (rr - rl),
        0.5 * (fl[1] + fr[1]) - 0.5 * s * (mr - ml),
    )


def viscous_flux(rho_left, rho_right, u_left, u_right, dx, params: Parameters) -> float:
    """Face stress ``mu_face * (u_right - u_left) / dx`` with the arithmetic
    mean of ``rho**delta``. The stepper zeroes it at faces touching vacuum."""
    if rho_left < 0.0 or rho_right < 0.0:
        raise NegativeDensity("face densities must be non-negative")
    if not dx > 0.0:
        raise InvalidInput("dx must be positive")
    mu = 0.5 * (rho_left**params.delta + rho_right**params.delta)
    return mu * (u_right - u_left) / dx


def face_stress(state: FluidState, params: Parameters) -> np.ndarray:
    """Viscous stress on the ``n + 1`` faces as used by the stepper: the
    arithmetic-mean coefficient, zeroed on faces touching a vacuum cell or
    a zero ghost."""
    r = np.concatenate(([0.0], state.rho, [0.0]))
    v = np.concatenate(([0.0], state.u, [0.0]))
    vac = r < state.rho_vac
    mu = 0.5 * (r[:-1] ** params.delta + r[1:] ** params.delta)
    mu[vac[:-1] | vac[1:]] = 0.0
    return mu * (v[1:] - v[:-1]) / state.dx


def max_wave_speed(state: FluidState, params: Parameters) -> float:
    c = np.sqrt(params.gamma * state.rho ** (params.gamma - 1.0))
    return float(np.max(np.abs(state.u) + c))


def cfl_dt(state: FluidState, config: SchemeConfig, params: Parameters) -> float:
    """Convective and viscous explicit limits, scaled by ``config.cfl``."""
    return _cfl_dt(state, config, params, max_wave_speed(state, params))


def _cfl_dt(state, config, params, speed):
    if state.rho.size == 0:
        raise EmptyState("state has no cells")
    dx = state.dx
    nu = float(np.max(state.rho)) ** (params.delta - 1.0)
    limits = []
    if speed > 0.0:
        limits.append(dx / speed)
    if nu > 0.0:
        limits.append(dx * dx / (2.0 * nu))
    if not limits:
        return config.dt_max
    return config.cfl * min(limits)


def step(
    state: FluidState,
    dt: float,
    config: SchemeConfig,
    params: Parameters,
    source: SourceFn | None = None,
    ghost: GhostFn | None = None,
    check_cfl: bool = True,
    _speed: float | None = None,
) -> tuple[FluidState, StepReport]:
    """Advance ``state`` by one Heun step of size ``dt``."""
    if not dt > 0.0:
        raise InvalidInput(f"dt must be positive, got {dt}")
    speed = max_wave_speed(state, params) if _speed is None else _speed
    if check_cfl:
        limit = _cfl_dt(state, config, params, speed)
        if dt > limit * (1.0 + _DT_SLACK):
            raise CflViolation(f"dt={dt:.6g} exceeds CFL limit {limit:.6g} at t={state.t:.6g}")
    t0 = state.t
    src0 = src1 = None
    if source is not None:
        x = state.x
        src0 = source(t0, x)
        src1 = source(t0 + dt, x)
    g0 = ghost(t0) if ghost is not None else None
    g1 = ghost(t0 + dt) if ghost is not None else None

    rho, mom, u, r1, u1, defect, outflow = kernels.ssprk2_step(
        state.rho, state.mom, state.u, float(dt), state.dx,
        params.gamma, params.delta, config.rho_vac, src0, src1, g0, g1,
    )
    if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(mom)) and np.all(np.isfinite(u))):
        raise NonFiniteValue(f"non-finite values after step at t={t0:.6g}, dt={dt:.6g}")
    new = FluidState._adopt(t0 + dt, state.grid, rho, u, config.rho_vac, mom)
    stage = FluidState._adopt(t0 + dt, state.grid, r1, u1, config.rho_vac, r1 * u1)
    report = StepReport(
        dt=float(dt),
        mass_defect=float(defect),
        max_wave_speed=speed,
        boundary_outflow=float(outflow),
        stage=stage,
    )
    return new, report


def advance_to(
    state: FluidState,
    t_target: float,
    config: SchemeConfig,
    params: Parameters,
    observer_hook: Callable[[FluidState], None] | None = None,
    sample_times: Iterable[float] = (),
    on_step: Callable[[FluidState, FluidState, StepReport], None] | None = None,
    source: SourceFn | None = None,
    ghost: GhostFn | None = None,
) -> FluidState:
    """Step until ``t_target``, landing exactly on every requested sample time.

    ``observer_hook(state)`` fires at each sample time in
    ``[state.t, t_target]``; ``on_step(old, new, report)`` fires after every
    step.
    """
    if not math.isfinite(t_target) or t_target < state.t:
        raise NonMonotoneTarget(f"target time {t_target} precedes state time {state.t}")
    samples = {float(s) for s in sample_times if state.t <= s <= t_target}
    if observer_hook is not None and state.t in samples:
        observer_hook(state)
    for stop in sorted(samples | {float(t_target)}):
        if stop <= state.t:
            continue
        while state.t < stop:
            speed = max_wave_speed(state, params)
            dt = _cfl_dt(state, config, params, speed)
            landing = dt >= (stop - state.t) * (1.0 - 1e-12)
            if landing:
                dt = stop - state.t
            new, report = step(state, dt, config, params, source=source, ghost=ghost,
                               check_cfl=False, _speed=speed)
            if landing:
                # snap so sample times are reproduced exactly
                new = new.at_time(stop)
            if on_step is not None:
                on_step(state, new, report)
            state = new
        if observer_hook is not None and stop in samples:
            observer_hook(state)
    return state
