"""Blow-up functionals on the tracked mass group and the crossing bound.

On the moving interval ``A(t)`` we evaluate mass ``m``, second moment
``M2``, radial momentum ``F`` and energy ``eps`` and combine them into

    I(t) = M2 - 2 (t+1) F + 2 (t+1)^2 eps.

``I`` is squeezed between a quadratic lower envelope (Jensen) and an
upper envelope growing like ``(1+t)^(3-gamma)`` (or linearly for
``gamma >= 3``). The first crossing of the two bounds the lifetime of a
regular solution.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .errors import InvalidInput, NegativeTime, NoCrossing, OutOfDomain
from .lagrangian import FlowInterval
from .model import FluidState, Parameters

GAMMA_GE_3 = "gamma>=3"
GAMMA_LT_3 = "1<gamma<3"


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    m: float
    M2: float
    F: float
    eps: float
    I: float
    I_alt: float
    dIdt_rhs: float
    sup_rho: float
    area_A: float
    dissipation: float
    rho_bound: float = float("nan")
    energy_residual: float = float("nan")
    pressure_int: float = 0.0
    viscous_work: float = 0.0
    rho_delta_int: float = 0.0

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class BlowUpReport:
    gamma_case: str
    a: float | None
    M_const: float
    I0: float
    lower_coeff: float
    t_cross: float
    area_A0: float
    m0: float
    t_max: float
    crossed_at_start: bool = False

    def as_dict(self) -> dict:
        return asdict(self)


def _bounds(interval) -> tuple[float, float]:
    if isinstance(interval, FlowInterval):
        return interval.bounds()
    a, b = interval
    return float(a), float(b)


def interval_weights(state: FluidState, interval) -> np.ndarray:
    """Fraction of each cell covered by ``[a, b]``."""
    a, b = _bounds(interval)
    g = state.grid
    if not (g.x_min <= a <= g.x_max and g.x_min <= b <= g.x_max):
        raise OutOfDomain(f"interval [{a:g}, {b:g}] leaves the grid [{g.x_min:g}, {g.x_max:g}]")
    if b < a:
        raise InvalidInput(f"interval endpoints out of order: a={a}, b={b}")
    left = g.faces[:-1]
    right = g.faces[1:]
    overlap = np.clip(np.minimum(right, b) - np.maximum(left, a), 0.0, None)
    return overlap / g.dx


def interval_quadrature(state: FluidState, interval, integrand) -> float:
    """Midpoint rule over ``[a, b]`` with fractional weights for the end cells.

    ``integrand`` is a per-cell array or a callable of the state.
    """
    f = integrand(state) if callable(integrand) else np.asarray(integrand, dtype=float)
    w = interval_weights(state, interval)
    return float(np.sum(w * f) * state.dx)


def interval_velocity_gradient(state: FluidState, weights: np.ndarray) -> np.ndarray:
    """``u_x`` by central differences; one-sided towards the interior at the two
    end cells of the interval so the stencil stays inside it."""
    u = state.u
    dx = state.dx
    ux = np.zeros_like(u)
    ux[1:-1] = (u[2:] - u[:-2]) / (2.0 * dx)
    ux[0] = (u[1] - u[0]) / dx
    ux[-1] = (u[-1] - u[-2]) / dx
    idx = np.flatnonzero(weights > 0.0)
    if idx.size >= 2:
        i0, i1 = idx[0], idx[-1]
        ux[i0] = (u[i0 + 1] - u[i0]) / dx
        ux[i1] = (u[i1] - u[i1 - 1]) / dx
    return ux


def _integrals(state: FluidState, interval, params: Parameters) -> dict:
    w = interval_weights(state, interval) * state.dx
    rho, u, x = state.rho, state.u, state.x
    p = rho**params.gamma
    rd = rho**params.delta
    ux = interval_velocity_gradient(state, w)
    return {
        "m": float(np.sum(w * rho)),
        "M2": float(np.sum(w * rho * x * x)),
        "F": float(np.sum(w * rho * u * x)),
        "kin": float(np.sum(w * 0.5 * rho * u * u)),
        "P": float(np.sum(w * p)),
        "visc": float(np.sum(w * rd * ux)),
        "diss": float(np.sum(w * rd * ux * ux)),
        "rd": float(np.sum(w * rd)),
        "area": float(np.sum(w)),
        "w": w,
    }


def _rhs(t, P, visc, diss, params: Parameters) -> float:
    g = params.gamma
    s = t + 1.0
    return 2.0 * (3.0 - g) / (g - 1.0) * s * P + 2.0 * s * visc - 2.0 * s * s * diss


def dIdt_rhs(state: FluidState, interval, t: float, params: Parameters) -> float:
    """Right side of the differential identity for ``I``:
    pressure work, viscous work and dissipation over ``A(t)``."""
    q = _integrals(state, interval, params)
    return _rhs(t, q["P"], q["visc"], q["diss"], params)


def compute_diagnostics(state: FluidState, interval, t: float, params: Parameters) -> DiagnosticsRecord:
    q = _integrals(state, interval, params)
    g = params.gamma
    s = t + 1.0
    eps = q["kin"] + q["P"] / (g - 1.0)
    I = q["M2"] - 2.0 * s * q["F"] + 2.0 * s * s * eps
    w = q["w"]
    rel = state.x - s * state.u
    I_alt = float(np.sum(w * rel * rel * state.rho)) + 2.0 * s * s / (g - 1.0) * q["P"]
    return DiagnosticsRecord(
        t=float(t),
        m=q["m"],
        M2=q["M2"],
        F=q["F"],
        eps=eps,
        I=I,
        I_alt=I_alt,
        dIdt_rhs=_rhs(t, q["P"], q["visc"], q["diss"], params),
        sup_rho=float(np.max(state.rho)),
        area_A=q["area"],
        dissipation=q["diss"],
        pressure_int=q["P"],
        viscous_work=q["visc"],
        rho_delta_int=q["rd"],
    )


def dissipation_bound(area_A0: float, rho_sup_bound: float, params: Parameters) -> float:
    """Constant bounding ``2 * integral of rho**delta`` over ``A(t)``."""
    return 2.0 * area_A0 * rho_sup_bound**params.delta


def gamma_case(params: Parameters) -> str:
    return GAMMA_GE_3 if params.gamma >= 3.0 else GAMMA_LT_3


def _growth_integral(t: float, a: float) -> float:
    # integral of (1+s)^-a over [0, t]
    if a == 1.0:
        return math.log1p(t)
    return ((1.0 + t) ** (1.0 - a) - 1.0) / (1.0 - a)


def upper_envelope(t: float, I0: float, M_const: float, params: Parameters) -> float:
    """Gronwall bound on ``I(t)``.

    Linear ``I0 + M t`` when ``gamma >= 3``; otherwise
    ``(1+t)^a (I0 + M * int_0^t (1+s)^-a ds)`` with ``a = 3 - gamma``.

    For ``1 < gamma < 3`` the exponent ranges over ``(0, 2)``, not only
    ``(1, 2)``; the integral is evaluated exactly on every branch, with the
    logarithm at ``a = 1``.
    """
    if t < 0.0:
        raise NegativeTime(f"t must be non-negative, got {t}")
    if params.gamma >= 3.0:
        return I0 + M_const * t
    a = 3.0 - params.gamma
    return (1.0 + t) ** a * (I0 + M_const * _growth_integral(t, a))


def lower_coefficient(area_A0: float, m0: float, params: Parameters) -> float:
    g = params.gamma
    return 2.0 * area_A0 ** (1.0 - g) * m0**g / (g - 1.0)


def lower_envelope(t: float, area_A0: float, m0: float, params: Parameters) -> float:
    """Jensen lower bound ``2 (1+t)^2 |A0|^(1-gamma) m0^gamma / (gamma-1)``."""
    if not area_A0 > 0.0:
        raise InvalidInput(f"area_A0 must be positive, got {area_A0}")
    if m0 < 0.0:
        raise InvalidInput(f"m0 must be non-negative, got {m0}")
    return (1.0 + t) ** 2 * lower_coefficient(area_A0, m0, params)


def first_crossing(
    lower: Callable[[float], float],
    upper: Callable[[float], float],
    t_max: float,
    rtol: float = 1e-10,
    n_scan: int = 4096,
) -> float:
    """Smallest ``t`` in ``[0, t_max]`` with ``lower(t) >= upper(t)``.

    A uniform scan brackets the first sign change of ``lower - upper``,
    then bisection refines it to relative width ``rtol``.
    Returns ``0.0`` when the bound already holds at ``t = 0``.
    """
    if not (math.isfinite(t_max) and t_max > 0.0):
        raise InvalidInput(f"t_max must be positive and finite, got {t_max}")

    def gap(t):
        return lower(t) - upper(t)

    if gap(0.0) >= 0.0:
        return 0.0
    lo = 0.0
    hi = None
    for k in range(1, n_scan + 1):
        t = t_max * k / n_scan
        if gap(t) >= 0.0:
            hi = t
            break
        lo = t
    if hi is None:
        raise NoCrossing(t_max)
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if gap(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    return hi


def predict_blowup_bound(
    I0: float,
    M_const: float,
    area_A0: float,
    m0: float,
    params: Parameters,
    t_max: float = 1e6,
) -> BlowUpReport:
    """Upper bound on the lifetime from the first envelope crossing."""
    if not (area_A0 > 0.0 and m0 > 0.0):
        raise InvalidInput("area_A0 and m0 must be positive")
    if not (I0 >= 0.0 and M_const >= 0.0):
        raise InvalidInput("I0 and M_const must be non-negative")
    t_cross = first_crossing(
        lambda t: lower_envelope(t, area_A0, m0, params),
        lambda t: upper_envelope(t, I0, M_const, params),
        t_max,
    )
    return BlowUpReport(
        gamma_case=gamma_case(params),
        a=None if params.gamma >= 3.0 else 3.0 - params.gamma,
        M_const=float(M_const),
        I0=float(I0),
        lower_coeff=lower_coefficient(area_A0, m0, params),
        t_cross=t_cross,
        area_A0=float(area_A0),
        m0=float(m0),
        t_max=float(t_max),
        crossed_at_start=t_cross == 0.0,
    )
