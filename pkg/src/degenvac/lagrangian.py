"""Particle paths, the momentum primitive xi and the density sup bound.

``xi(t, x)`` is the integral of ``rho*u`` from the left edge of the domain.
Along particle paths ``xi + rho**delta / delta`` decays at rate
``rho**gamma``, which bounds the density for all time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import OutOfDomain
from .model import FluidState, Parameters

DEFAULT_INTERIOR_TRACERS = 16


@dataclass
class ParticlePath:
    """Trajectory ``y(t; x0)`` sampled at the times in ``times``."""

    x0: float
    label: str = "interior-tracer"
    times: list[float] = field(default_factory=lambda: [0.0])
    positions: list[float] = field(default_factory=list)

    def __post_init__(self):
        if not self.positions:
            self.positions = [float(self.x0)]

    @property
    def current(self) -> float:
        return self.positions[-1]

    @property
    def t(self) -> float:
        return self.times[-1]

    def record(self, t: float, y: float) -> None:
        self.times.append(float(t))
        self.positions.append(float(y))


@dataclass
class FlowInterval:
    """Image ``(a(t), b(t))`` of the initial mass group under the flow."""

    a: ParticlePath
    b: ParticlePath

    @property
    def width(self) -> np.ndarray:
        return np.asarray(self.b.positions) - np.asarray(self.a.positions)

    def bounds(self) -> tuple[float, float]:
        return self.a.current, self.b.current


def seed_paths(a0: float, b0: float, n_interior: int = DEFAULT_INTERIOR_TRACERS) -> list[ParticlePath]:
    """Endpoint paths first, then ``n_interior`` evenly spaced interior tracers."""
    paths = [ParticlePath(a0, "interval-endpoint"), ParticlePath(b0, "interval-endpoint")]
    for k in range(1, n_interior + 1):
        paths.append(ParticlePath(a0 + (b0 - a0) * k / (n_interior + 1)))
    return paths


def _check_inside(state: FluidState, x) -> np.ndarray:
    xs = np.asarray(x, dtype=float)
    g = state.grid
    if np.any(~np.isfinite(xs)) or np.any(xs < g.x_min) or np.any(xs > g.x_max):
        raise OutOfDomain(f"position outside [{g.x_min:g}, {g.x_max:g}]")
    return xs


def velocity_at(state: FluidState, x):
    """Piecewise-linear interpolation of the cell-centred velocity."""
    xs = _check_inside(state, x)
    out = kernels.interp_cells(state.u, xs, state.grid.x_min, state.dx)
    return float(out) if np.ndim(x) == 0 else np.asarray(out)


def density_at(state: FluidState, x):
    xs = _check_inside(state, x)
    out = kernels.interp_cells(state.rho, xs, state.grid.x_min, state.dx)
    return float(out) if np.ndim(x) == 0 else np.asarray(out)


def advance_positions(y: np.ndarray, state_n: FluidState, state_star: FluidState, dt: float) -> np.ndarray:
    """Heun step for an array of positions using the two stage velocity fields."""
    g = state_n.grid
    return kernels.advance_points(np.ascontiguousarray(y, dtype=float), state_n.u, state_star.u, dt, g.x_min, g.dx)


def advance_particles(paths: list[ParticlePath], state_n: FluidState, state_star: FluidState, dt: float) -> list[ParticlePath]:
    """Advance every path by one step and record the new position."""
    y = np.array([p.current for p in paths])
    _check_inside(state_n, y)
    y_new = advance_positions(y, state_n, state_star, dt)
    _check_inside(state_n, y_new)
    for p, yn in zip(paths, y_new):
        p.record(p.t + dt, yn)
    return paths


def xi_field(state: FluidState) -> np.ndarray:
    """Face values of ``xi``; exact prefix integrals of piecewise-constant ``rho*u``."""
    xi = np.zeros(state.grid.n_cells + 1)
    np.cumsum(state.mom * state.dx, out=xi[1:])
    return xi


def xi_at(state: FluidState, x, xi: np.ndarray | None = None):
    xs = _check_inside(state, x)
    faces = xi_field(state) if xi is None else xi
    out = np.interp(xs, state.grid.faces, faces)
    return float(out) if np.ndim(x) == 0 else out


def monotone_quantity(state: FluidState, x, params: Parameters, xi: np.ndarray | None = None):
    """``xi + rho**delta / delta`` at position(s) ``x`` (or a path's current point)."""
    if isinstance(x, ParticlePath):
        x = x.current
    q = xi_at(state, x, xi) + np.power(density_at(state, x), params.delta) / params.delta
    return float(q) if np.ndim(x) == 0 else q


def density_bound_constant(initial_state: FluidState, params: Parameters) -> float:
    """A-priori sup bound ``(delta * (S0 + K))**(1/delta)``.

    ``S0`` is the largest initial value of ``xi + rho**delta/delta``
    (the far-field value 0 included) and ``K = sqrt(2 E0 m)`` bounds
    ``|xi|`` through the energy and the total mass.
    """
    s = initial_state
    xi_c = np.interp(s.x, s.grid.faces, xi_field(s))
    s0 = max(0.0, float(np.max(xi_c + s.rho**params.delta / params.delta)))
    e0 = s.total_energy(params)
    m = s.total_mass()
    k = math.sqrt(2.0 * e0 * m)
    total = s0 + k
    if total <= 0.0:
        return 0.0
    return (params.delta * total) ** (1.0 / params.delta)
