"""Manufactured solutions, the invariant suite and refinement studies."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
import sympy as sp

from .errors import InsufficientLevels, InvalidInput
from .functionals import dissipation_bound, lower_coefficient
from .model import FluidState, Grid, Parameters, pressure, sound_speed, viscosity
from .runner import RunResult, Setup, simulate
from .scheme import SchemeConfig, advance_to, convective_flux, face_stress, step

T, X = sp.symbols("t x", real=True)


class ManufacturedSolution:
    """Closed-form ``rho(t, x)``, ``u(t, x)`` given as sympy expressions in
    :data:`T` and :data:`X`.

    Derivatives and the PDE residuals are taken symbolically; numeric
    evaluation goes through ``sympy.lambdify``.
    """

    def __init__(self, rho: sp.Expr, u: sp.Expr, window: tuple[float, float, float, float] | None = None,
                 name: str = "mms"):
        self.rho_expr = sp.sympify(rho)
        self.u_expr = sp.sympify(u)
        self.name = name
        # (t0, t1, x0, x1); None means unrestricted
        self.window = window
        self._num = {}

    def derivative(self, field_name: str, var: str) -> sp.Expr:
        expr = {"rho": self.rho_expr, "u": self.u_expr}[field_name]
        return sp.diff(expr, {"t": T, "x": X}[var])

    def residual_exprs(self, params: Parameters) -> tuple[sp.Expr, sp.Expr]:
        r, u = self.rho_expr, self.u_expr
        g, d = sp.nsimplify(params.gamma), sp.nsimplify(params.delta)
        cont = sp.diff(r, T) + sp.diff(r * u, X)
        mom = (sp.diff(r * u, T) + sp.diff(r * u * u, X) + sp.diff(r**g, X)
               - sp.diff(r**d * sp.diff(u, X), X))
        return cont, mom

    def _fn(self, key, builder):
        if key not in self._num:
            self._num[key] = sp.lambdify((T, X), builder(), "numpy", cse=True)
        return self._num[key]

    def rho(self, t, x):
        return _broadcast(self._fn("rho", lambda: self.rho_expr)(t, x), x)

    def u(self, t, x):
        return _broadcast(self._fn("u", lambda: self.u_expr)(t, x), x)

    def source(self, params: Parameters) -> Callable[[float, np.ndarray], tuple[np.ndarray, np.ndarray]]:
        """Source terms that make this solution exact: ``(s_rho, s_mom)``."""
        key = ("src", params.gamma, params.delta)
        fn = self._fn(key, lambda: list(self.residual_exprs(params)))

        last = {}

        # each step evaluates at its start and end time; the end of one step
        # is the start of the next, so keep the most recent evaluation
        def src(t, x):
            hit = last.get("key")
            if hit is not None and hit[0] == t and hit[1] is x:
                return last["val"]
            a, b = fn(t, x)
            val = (_broadcast(a, x), _broadcast(b, x))
            last["key"], last["val"] = (t, x), val
            return val

        return src

    def ghost(self, grid: Grid) -> Callable[[float], tuple[float, float, float, float]]:
        """Exact states in the single ghost cell on each side of ``grid``."""
        xl = grid.x_min - 0.5 * grid.dx
        xr = grid.x_max + 0.5 * grid.dx

        def g(t):
            return (float(self.rho(t, xl)), float(self.u(t, xl)),
                    float(self.rho(t, xr)), float(self.u(t, xr)))

        return g

    def state(self, t: float, grid: Grid, rho_vac: float = 1e-10) -> FluidState:
        x = grid.centers
        return FluidState(t, grid, self.rho(t, x), self.u(t, x), rho_vac)

    def check_positive(self, grid: Grid, t0: float, t1: float, n_t: int = 33) -> float:
        low = min(float(np.min(self.rho(t, grid.centers))) for t in np.linspace(t0, t1, n_t))
        if low < 0.0:
            raise InvalidInput(f"manufactured density negative (min {low:.3g})")
        return low


def _broadcast(v, x):
    return np.broadcast_to(np.asarray(v, dtype=float), np.shape(x)).copy() if np.ndim(x) else float(v)


def default_mms() -> ManufacturedSolution:
    """Strictly positive travelling wave with a decaying velocity mode."""
    rho = sp.Rational(3, 5) + sp.Rational(1, 5) * sp.sin(sp.pi * (X - T / 2))
    u = sp.Rational(2, 5) + sp.Rational(1, 5) * sp.cos(sp.pi * X) * sp.exp(-T)
    return ManufacturedSolution(rho, u, window=(0.0, 0.1, -1.0, 1.0), name="travelling-wave")


def mms_residual(sol: ManufacturedSolution, t, x, params: Parameters):
    """Continuity and momentum residuals of ``sol`` evaluated at ``(t, x)``."""
    cont, mom = sol.residual_exprs(params)
    f = sp.lambdify((T, X), [cont, mom], "numpy")
    a, b = f(t, x)
    return _broadcast(a, x), _broadcast(b, x)


def mms_error(sol: ManufacturedSolution, n_cells: int, params: Parameters, t_final: float = 0.1,
              cfl: float = 0.4) -> dict:
    """L1 errors of density and velocity after running the scheme with the
    manufactured sources and exact ghost states."""
    t0, t1, xa, xb = sol.window if sol.window is not None else (0.0, t_final, -1.0, 1.0)
    t1 = t0 + t_final if sol.window is None else t1
    grid = Grid(xa, xb, n_cells)
    sol.check_positive(grid, t0, t1)
    s0 = sol.state(t0, grid)
    config = SchemeConfig(cfl=cfl, rho_vac=s0.rho_vac)
    final = advance_to(s0, t1, config, params, source=sol.source(params), ghost=sol.ghost(grid))
    x = grid.centers
    return {
        "n_cells": n_cells,
        "dx": grid.dx,
        "rho": float(np.sum(np.abs(final.rho - sol.rho(t1, x))) * grid.dx),
        "u": float(np.sum(np.abs(final.u - sol.u(t1, x))) * grid.dx),
    }


@dataclass(frozen=True)
class Check:
    name: str
    anchor: str
    measured: float
    tolerance: float
    passed: bool
    lower: float | None = None  # set for two-sided checks
    detail: dict = field(default_factory=dict)


@dataclass
class VerificationReport:
    title: str
    checks: list[Check] = field(default_factory=list)
    orders: dict = field(default_factory=dict)
    margins: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def add(self, name, anchor, measured, tolerance, lower=None, **detail) -> Check:
        measured = float(measured)
        ok = math.isfinite(measured) and measured <= tolerance and (lower is None or measured >= lower)
        c = Check(name, anchor, measured, float(tolerance), bool(ok),
                  None if lower is None else float(lower), detail)
        self.checks.append(c)
        return c

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "passed": self.passed,
            "checks": [asdict(c) for c in self.checks],
            "orders": self.orders,
            "margins": self.margins,
        }

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_dict()), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = [f"# {self.title}"]
        for c in self.checks:
            bound = f"<= {c.tolerance:.6g}" if c.lower is None else f"in [{c.lower:.6g}, {c.tolerance:.6g}]"
            lines.append(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.measured:.6e} {bound}  [{c.anchor}]")
        for k, v in self.orders.items():
            lines.append(f"order {k}: {_fmt_list(v)}")
        for k, v in self.margins.items():
            lines.append(f"margin {k}: {_fmt_list(v)}")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def _fmt_list(v):
    if isinstance(v, (list, tuple)):
        return ", ".join(f"{float(e):.6g}" for e in v)
    return f"{float(v):.6g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _rel(x, scale):
    return x / scale if scale > 0.0 else x


# Anchor strings name the identity each check certifies.
ANCHORS = {
    "initial_annulus_vacuum": "int_{B0 \\ A0} rho0 = 0 < int_{A0} rho0",
    "initial_endpoint_velocity": "u0(a0) = u0(b0) = ubar0",
    "constitutive_monotone": "p, mu, c nondecreasing in rho",
    "global_mass": "d/dt int rho dx = 0",
    "positivity": "rho >= 0",
    "flux_consistency": "F(U, U) = f(U)",
    "vacuum_degeneracy": "rho^delta u_x = 0 at vacuum faces",
    "zero_fixed_point": "step(0) = 0",
    "path_monotonicity": "d/dt (xi + rho^delta/delta) = -rho^gamma along paths",
    "sup_bound": "sup rho(t) <= (delta (S0 + K))^(1/delta)",
    "endpoint_speed": "a(t) = a0 + ubar0 t, b(t) = b0 + ubar0 t",
    "volume_invariance": "|A(t)| = |A0|",
    "representation_identity": "I = int rho (x - (t+1) u)^2 + 2 (t+1)^2/(gamma-1) int p",
    "derivative_identity": "dI/dt = 2(3-gamma)/(gamma-1)(t+1) int p + 2(t+1) int rho^delta u_x - 2(t+1)^2 int rho^delta u_x^2",
    "jensen_bound": "I(t) >= 2(1+t)^2 |A0|^(1-gamma) m0^gamma / (gamma-1)",
    "cauchy_bound": "2(t+1) int rho^delta u_x - 2(t+1)^2 int rho^delta u_x^2 <= 2 int_A rho^delta <= M",
    "energy_balance": "E(t) + int_0^t int rho^delta u_x^2 = E(0)",
    "energy_nonincreasing": "dE/dt <= 0",
    "group_mass": "int_{A(t)} rho = int_{A0} rho0",
}


def _initial_checks(rep: VerificationReport, run: RunResult) -> None:
    setup, s0 = run.setup, run.initial_state
    if setup.initial == "zero":
        rep.add("initial_annulus_vacuum", ANCHORS["initial_annulus_vacuum"], 0.0, 0.0)
        rep.add("initial_endpoint_velocity", ANCHORS["initial_endpoint_velocity"], 0.0, 0.0)
    else:
        spec = setup.spec
        x = s0.x
        ring = (np.abs(x) > spec.c) & (np.abs(x) < spec.c + 1.0)
        inner = np.abs(x) < spec.c
        annulus = float(np.sum(s0.rho[ring]) * s0.dx)
        core = float(np.sum(s0.rho[inner]) * s0.dx)
        # an empty core is as much a violation as mass in the annulus
        rep.add("initial_annulus_vacuum", ANCHORS["initial_annulus_vacuum"],
                annulus if core > 0.0 else math.inf, 0.0, core_mass=core)
        ua, ub = spec.velocity(np.array([spec.a0, spec.b0]))
        rep.add("initial_endpoint_velocity", ANCHORS["initial_endpoint_velocity"], abs(ua - ub), 0.0)
    params = setup.params
    r = np.linspace(0.0, max(2.0, 2.0 * float(np.max(s0.rho))), 257)
    worst = 0.0
    for f in (pressure, viscosity, sound_speed):
        v = f(r, params)
        worst = max(worst, float(np.max(-np.diff(v))))
    rep.add("constitutive_monotone", ANCHORS["constitutive_monotone"], max(worst, 0.0), 0.0)


def _scheme_checks(rep: VerificationReport, run: RunResult) -> None:
    params = run.setup.params
    m0 = float(run.total_mass[0])
    err = float(np.max(np.abs(run.mass_balance_error)))
    rep.add("global_mass", ANCHORS["global_mass"], _rel(err, m0), 1e-12,
            defect=float(run.defect[-1]), outflow=float(run.outflow[-1]))
    low = min(float(np.min(s.rho)) for s in (run.initial_state, run.final_state))
    low = min(low, min(float(np.min(s.rho)) for s in run.snapshots) if run.snapshots else low)
    rep.add("positivity", ANCHORS["positivity"], max(0.0, -low), 0.0)

    fin = run.final_state
    ferr = 0.0
    for r, m in zip(fin.rho, fin.mom):
        f = convective_flux((r, m), (r, m), params)
        uu = m / r if r > 0.0 else 0.0
        ferr = max(ferr, abs(f[0] - m), abs(f[1] - (m * uu + pressure(float(r), params))))
    rep.add("flux_consistency", ANCHORS["flux_consistency"], ferr, 0.0)

    worst = 0.0
    for s in [run.initial_state, fin] + run.snapshots:
        tau = face_stress(s, params)
        r = np.concatenate(([0.0], s.rho, [0.0]))
        vac = r < s.rho_vac
        mask = vac[:-1] & vac[1:]
        if np.any(mask):
            worst = max(worst, float(np.max(np.abs(tau[mask]))))
    rep.add("vacuum_degeneracy", ANCHORS["vacuum_degeneracy"], worst, 0.0)

    z = FluidState.zeros(fin.grid, fin.rho_vac)
    cfg = SchemeConfig(cfl=run.setup.cfl, rho_vac=fin.rho_vac, dt_max=run.setup.dt_max)
    z1, _ = step(z, 1e-3, cfg, params)
    zerr = max(float(np.max(np.abs(z1.rho))), float(np.max(np.abs(z1.u))))
    rep.add("zero_fixed_point", ANCHORS["zero_fixed_point"], zerr, 0.0)


def path_residual(run: RunResult, interior_only: bool = False) -> float:
    """Max over paths and samples of ``|Q(t) - Q(0) + int_0^t rho^gamma|``."""
    q = run.path_q - run.path_q[0] + run.path_pressure_integral
    if interior_only:
        q = q[:, 2:]
    return float(np.max(np.abs(q))) if q.size else 0.0


def derivative_mismatch(run: RunResult) -> np.ndarray:
    """Relative mismatch of the centred difference of ``I`` against the
    computed right-hand side at interior samples."""
    t = run.times
    if t.size < 3:
        return np.zeros(0)
    I = np.array([r.I for r in run.records])
    rhs = np.array([r.dIdt_rhs for r in run.records])
    fd = (I[2:] - I[:-2]) / (t[2:] - t[:-2])
    diff = np.abs(fd - rhs[1:-1])
    scale = np.abs(rhs[1:-1])
    return np.where(scale > 0.0, diff / np.where(scale > 0.0, scale, 1.0), diff)


def _lagrangian_checks(rep: VerificationReport, run: RunResult) -> None:
    dx = run.dx
    setup = run.setup
    t = run.times
    q = run.path_q
    rise = float(np.max(np.diff(q, axis=0))) if q.shape[0] > 1 else 0.0
    rep.add("path_monotonicity", ANCHORS["path_monotonicity"], max(rise, 0.0), 10.0 * dx,
            ode_residual=path_residual(run), n_paths=int(q.shape[1]))
    sup = max(r.sup_rho for r in run.records)
    bound = run.rho_bound
    rep.add("sup_bound", ANCHORS["sup_bound"], sup - bound * (1.0 + 1e-3), 0.0, sup_rho=sup, bound=bound)
    a0, b0 = setup.interval0()
    ubar = 0.0 if setup.initial == "zero" else setup.spec.u_bar
    pos = np.array([[p.positions[k] for p in run.paths[:2]] for k in range(len(t))])
    drift = np.abs(pos - (np.array([a0, b0]) + ubar * t[:, None]))
    rep.add("endpoint_speed", ANCHORS["endpoint_speed"], float(np.max(drift)), 5.0 * dx,
            endpoint_u_dev=float(np.max(np.abs(run.path_u[:, :2] - ubar))))
    width = pos[:, 1] - pos[:, 0]
    rep.add("volume_invariance", ANCHORS["volume_invariance"], float(np.max(np.abs(width - (b0 - a0)))), 2.0 * dx)


def _functional_checks(rep: VerificationReport, run: RunResult) -> None:
    params = run.setup.params
    recs = run.records
    dx = run.dx
    rep_err = max(_rel(abs(r.I - r.I_alt), abs(r.I)) for r in recs)
    rep.add("representation_identity", ANCHORS["representation_identity"], rep_err, 1e-3)
    mm = derivative_mismatch(run)
    rep.add("derivative_identity", ANCHORS["derivative_identity"], float(np.max(mm)) if mm.size else 0.0, 0.05,
            median=float(np.median(mm)) if mm.size else 0.0)

    a0, b0 = run.setup.interval0()
    area0, m0 = b0 - a0, recs[0].m
    coeff = lower_coefficient(area0, m0, params) if area0 > 0.0 and m0 > 0.0 else 0.0
    jensen = max(coeff * (1.0 + r.t) ** 2 - r.I * (1.0 + 10.0 * dx) for r in recs)
    rep.add("jensen_bound", ANCHORS["jensen_bound"], jensen, 0.0)

    m_const = dissipation_bound(area0, run.rho_bound, params)
    worst_chain = -math.inf
    for r in recs:
        s = r.t + 1.0
        lhs = 2.0 * s * r.viscous_work - 2.0 * s * s * r.dissipation
        # both links of the chain, quadrature slack relative to M
        worst_chain = max(worst_chain, lhs - 2.0 * r.rho_delta_int, 2.0 * r.rho_delta_int - m_const)
    rep.add("cauchy_bound", ANCHORS["cauchy_bound"], worst_chain, 10.0 * dx * max(m_const, 0.0),
            M_const=m_const)

    e0 = float(run.global_energy[0])
    res = float(np.max(np.abs(run.energy_residual)))
    rep.add("energy_balance", ANCHORS["energy_balance"], res, 5.0 * (dx + run.max_dt) * e0, E0=e0)
    rise = float(np.max(np.diff(run.global_energy))) if run.global_energy.size > 1 else 0.0
    rep.add("energy_nonincreasing", ANCHORS["energy_nonincreasing"], max(rise, 0.0), 1e-9 * e0)

    m = np.array([r.m for r in recs])
    rep.add("group_mass", ANCHORS["group_mass"], float(np.max(_rel(np.abs(m - m[0]), m[0]))), 1e-3)


def run_invariant_suite(setup: Setup, tamper=None, run: RunResult | None = None) -> VerificationReport:
    """Simulate ``setup`` (unless ``run`` is given) and check every invariant once."""
    if run is None:
        run = simulate(setup, tamper=tamper)
    rep = VerificationReport(title=f"invariant suite n_cells={setup.n_cells} t_final={setup.t_final:g}")
    _initial_checks(rep, run)
    _scheme_checks(rep, run)
    _lagrangian_checks(rep, run)
    _functional_checks(rep, run)
    rep.margins = {c.name: (c.tolerance - c.measured) for c in rep.checks}
    return rep


def _ratios(v):
    out = []
    for a, b in zip(v[:-1], v[1:]):
        if a == 0.0 and b == 0.0:
            out.append(float("inf"))
        else:
            out.append(a / b if b != 0.0 else float("inf"))
    return out


def convergence_study(setup: Setup, levels: list[int], mms: ManufacturedSolution | None = None,
                      include_mms: bool = True) -> VerificationReport:
    """Observed MMS order and identity-residual decay over doubling ``levels``."""
    levels = [int(n) for n in levels]
    if len(levels) < 3:
        raise InsufficientLevels(f"need at least 3 levels, got {len(levels)}")
    if any(b != 2 * a for a, b in zip(levels[:-1], levels[1:])):
        raise InsufficientLevels(f"levels must double: {levels}")
    rep = VerificationReport(title=f"convergence study levels={levels}")
    params = setup.params
    if include_mms:
        sol = mms or default_mms()
        errs = [mms_error(sol, n, params, cfl=setup.cfl) for n in levels]
        orders = [math.log2(a["rho"] / b["rho"]) for a, b in zip(errs[:-1], errs[1:])]
        u_orders = [math.log2(a["u"] / b["u"]) for a, b in zip(errs[:-1], errs[1:])]
        rep.orders = {"mms_rho_L1": orders, "mms_u_L1": u_orders}
        rep.margins["mms_rho_L1_error"] = [e["rho"] for e in errs]
        rep.add("mms_order", "L1 error = O(dx)", min(orders), math.inf, lower=0.8)

    runs = [simulate(Setup(**{**setup.__dict__, "n_cells": n})) for n in levels]
    energy = [float(np.max(np.abs(r.energy_residual))) for r in runs]
    deriv = [float(np.max(derivative_mismatch(r))) if r.times.size > 2 else 0.0 for r in runs]
    path = [path_residual(r) for r in runs]
    rep.margins.update({"energy_residual": energy, "derivative_mismatch": deriv, "path_residual": path})
    for name, vals, anchor in (
        ("energy_residual_decay", energy, ANCHORS["energy_balance"]),
        ("derivative_mismatch_decay", deriv, ANCHORS["derivative_identity"]),
        ("path_residual_decay", path, ANCHORS["path_monotonicity"]),
    ):
        ratios = _ratios(vals)
        rep.orders[name] = ratios
        if all(v == 0.0 for v in vals):
            rep.add(name, anchor, 0.0, 0.0, values=vals)
        elif name == "energy_residual_decay":
            worst = max(ratios, key=lambda r: max(1.5 - r, r - 3.0))
            rep.add(name, anchor, worst, 3.0, lower=1.5, ratios=ratios)
        else:
            rep.add(name, anchor, min(ratios), math.inf, lower=1.0)
    return rep


__all__ = [
    "T",
    "X",
    "ANCHORS",
    "Check",
    "ManufacturedSolution",
    "VerificationReport",
    "convergence_study",
    "default_mms",
    "derivative_mismatch",
    "mms_error",
    "mms_residual",
    "path_residual",
    "run_invariant_suite",
]
