"""Run orchestration: one simulation with tracers, diagnostics and ledgers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels
from .functionals import DiagnosticsRecord, compute_diagnostics
from .lagrangian import (
    FlowInterval,
    ParticlePath,
    advance_positions,
    density_bound_constant,
    seed_paths,
    xi_field,
)
from .model import (
    FluidState,
    Grid,
    IsolatedMassGroupSpec,
    Parameters,
    auto_grid,
    build_isolated_mass_group,
    vacuum_threshold,
)
from .scheme import SchemeConfig, advance_to

INITIAL_KINDS = ("isolated-mass-group", "zero")


@dataclass(frozen=True)
class Setup:
    """Everything needed to start a run, independent of file formats."""

    params: Parameters
    spec: IsolatedMassGroupSpec
    n_cells: int
    t_final: float
    half_width: float | None = None  # None: auto from the truncation margin
    cfl: float = 0.4
    rho_vac: float | None = None  # None: relative to peak initial density
    dt_max: float = 1e-2
    n_samples: int = 101
    n_tracers: int = 16
    initial: str = "isolated-mass-group"

    def grid(self) -> Grid:
        if self.half_width is None:
            return auto_grid(self.spec, self.params, self.t_final, self.n_cells)
        return Grid.symmetric(self.half_width, self.n_cells)

    def initial_state(self) -> FluidState:
        grid = self.grid()
        if self.initial == "zero":
            rho_vac = self.rho_vac if self.rho_vac is not None else vacuum_threshold(np.zeros(1))
            return FluidState.zeros(grid, rho_vac)
        state = build_isolated_mass_group(self.spec, grid, self.params, self.t_final)
        if self.rho_vac is not None:
            state = FluidState(0.0, grid, state.rho, state.u, self.rho_vac)
        return state

    def interval0(self) -> tuple[float, float]:
        # the zero control has no mass group: degenerate interval at the origin
        if self.initial == "zero":
            return (0.0, 0.0)
        return (self.spec.a0, self.spec.b0)

    def sample_times(self) -> np.ndarray:
        if self.t_final == 0.0:
            return np.zeros(1)
        return np.linspace(0.0, self.t_final, max(self.n_samples, 2))


@dataclass
class RunResult:
    setup: Setup
    initial_state: FluidState
    final_state: FluidState
    records: list[DiagnosticsRecord]
    paths: list[ParticlePath]
    path_u: np.ndarray  # [sample, path]
    path_xi: np.ndarray
    path_q: np.ndarray  # xi + rho**delta/delta along paths
    path_pressure_integral: np.ndarray  # time integral of rho**gamma along paths
    total_mass: np.ndarray  # global mass per sample
    defect: np.ndarray  # cumulative clipping defect per sample
    outflow: np.ndarray  # cumulative boundary outflow per sample
    global_energy: np.ndarray
    dissipation_integral: np.ndarray  # cumulative global dissipation per sample
    rho_bound: float
    max_dt: float
    n_steps: int
    snapshots: list[FluidState] = field(default_factory=list)

    @property
    def dx(self) -> float:
        return self.initial_state.dx

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    @property
    def interval(self) -> FlowInterval:
        return FlowInterval(self.paths[0], self.paths[1])

    @property
    def energy_residual(self) -> np.ndarray:
        return self.global_energy - self.global_energy[0] + self.dissipation_integral

    @property
    def mass_balance_error(self) -> np.ndarray:
        return self.total_mass - self.total_mass[0] - self.defect + self.outflow


def simulate(
    setup: Setup,
    keep_snapshots: bool = False,
    tamper: tuple[float, Callable[[FluidState], FluidState]] | None = None,
    initial_state: FluidState | None = None,
) -> RunResult:
    """Run ``setup`` to ``t_final``, sampling at uniform times.

    ``tamper = (t, fn)`` replaces the state by ``fn(state)`` at time ``t``;
    used for negative controls. ``initial_state`` overrides the data built
    from ``setup`` (the tracked interval still comes from ``setup``).
    """
    params = setup.params
    s0 = setup.initial_state() if initial_state is None else initial_state
    config = SchemeConfig(cfl=setup.cfl, rho_vac=s0.rho_vac, dt_max=setup.dt_max)
    a0, b0 = setup.interval0()
    paths = seed_paths(a0, b0, setup.n_tracers)
    y = np.array([p.x0 for p in paths])
    g = s0.grid
    rho_bound = density_bound_constant(s0, params)

    def rho_gamma_at(state, pts):
        return kernels.interp_cells(state.rho, pts, g.x_min, g.dx) ** params.gamma

    acc = {
        "defect": 0.0,
        "outflow": 0.0,
        "diss": 0.0,
        "diss_prev": kernels.face_dissipation(s0.rho, s0.u, g.dx, params.delta, s0.rho_vac),
        "pint": np.zeros(y.size),
        "pg_prev": rho_gamma_at(s0, y),
        "max_dt": 0.0,
        "steps": 0,
        "tampered": tamper is None,
    }
    cols: dict[str, list] = {k: [] for k in ("mass", "defect", "outflow", "energy", "diss", "u", "xi", "q", "pint")}
    records: list[DiagnosticsRecord] = []
    snapshots: list[FluidState] = []

    def on_step(old: FluidState, new: FluidState, report) -> None:
        nonlocal y
        y = advance_positions(y, old, report.stage, report.dt)
        acc["defect"] += report.mass_defect
        acc["outflow"] += report.boundary_outflow
        d_new = kernels.face_dissipation(new.rho, new.u, g.dx, params.delta, new.rho_vac)
        acc["diss"] += 0.5 * report.dt * (acc["diss_prev"] + d_new)
        acc["diss_prev"] = d_new
        pg = rho_gamma_at(new, y)
        acc["pint"] = acc["pint"] + 0.5 * report.dt * (acc["pg_prev"] + pg)
        acc["pg_prev"] = pg
        acc["max_dt"] = max(acc["max_dt"], report.dt)
        acc["steps"] += 1

    def observe(state: FluidState) -> None:
        t = state.t
        for p, yk in zip(paths, y):
            if t > 0.0:
                p.record(t, yk)
        rec = compute_diagnostics(state, (y[0], y[1]), t, params)
        xi = xi_field(state)
        xi_p = np.interp(y, g.faces, xi)
        q = xi_p + kernels.interp_cells(state.rho, y, g.x_min, g.dx) ** params.delta / params.delta
        cols["mass"].append(state.total_mass())
        cols["defect"].append(acc["defect"])
        cols["outflow"].append(acc["outflow"])
        cols["energy"].append(state.total_energy(params))
        cols["diss"].append(acc["diss"])
        cols["u"].append(kernels.interp_cells(state.u, y, g.x_min, g.dx))
        cols["xi"].append(xi_p)
        cols["q"].append(q)
        cols["pint"].append(acc["pint"].copy())
        records.append(rec)
        if keep_snapshots:
            snapshots.append(state)

    times = setup.sample_times()
    if tamper is None:
        final = advance_to(s0, float(times[-1]), config, params, observe, times, on_step)
    else:
        t_tamper, fn = tamper
        mid = advance_to(s0, t_tamper, config, params, observe, times, on_step)
        # observer already saw the untampered state if t_tamper is a sample time
        mid = fn(mid)
        rest = [t for t in times if t > t_tamper]
        final = advance_to(mid, float(times[-1]), config, params, observe, rest, on_step)

    energy = np.array(cols["energy"])
    residual_final = energy - energy[0] + np.array(cols["diss"])
    records = [
        DiagnosticsRecord(**{**r.as_dict(), "rho_bound": rho_bound, "energy_residual": float(e)})
        for r, e in zip(records, residual_final)
    ]
    return RunResult(
        setup=setup,
        initial_state=s0,
        final_state=final,
        records=records,
        paths=paths,
        path_u=np.array(cols["u"]),
        path_xi=np.array(cols["xi"]),
        path_q=np.array(cols["q"]),
        path_pressure_integral=np.array(cols["pint"]),
        total_mass=np.array(cols["mass"]),
        defect=np.array(cols["defect"]),
        outflow=np.array(cols["outflow"]),
        global_energy=energy,
        dissipation_integral=np.array(cols["diss"]),
        rho_bound=rho_bound,
        max_dt=acc["max_dt"],
        n_steps=acc["steps"],
        snapshots=snapshots,
    )


def initial_blowup_inputs(setup: Setup) -> dict:
    """Constants for the crossing bound computed from the discrete initial data."""
    params = setup.params
    s0 = setup.initial_state()
    a0, b0 = setup.interval0()
    rec = compute_diagnostics(s0, (a0, b0), 0.0, params)
    return {
        "I0": rec.I,
        "m0": rec.m,
        "area_A0": b0 - a0,
        "rho_bound": density_bound_constant(s0, params),
        "dx": s0.dx,
    }

