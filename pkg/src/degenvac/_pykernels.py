"""Pure numpy kernels. Reference path and fallback for the compiled core."""

from __future__ import annotations

import numpy as np


ZERO_GHOST = (0.0, 0.0, 0.0, 0.0)


def _pad(a: np.ndarray, left: float = 0.0, right: float = 0.0) -> np.ndarray:
    # one ghost per side is all the first-order stencil reads
    out = np.empty(a.size + 2)
    out[0] = left
    out[1:-1] = a
    out[-1] = right
    return out


def stage_rhs(rho, mom, u, dx, gamma, delta, rho_vac, ghost=ZERO_GHOST):
    """Semi-discrete right-hand side for one forward-Euler stage.

    ``ghost`` is ``(rho_left, u_left, rho_right, u_right)`` for the single
    ghost cell on each side. Returns ``(drho, dmom, du_vac, left_mass_flux,
    right_mass_flux)`` where ``du_vac`` is the upwind Burgers tendency used
    in vacuum cells.
    """
    idx = 1.0 / dx
    grl, gul, grr, gur = ghost
    r = _pad(rho, grl, grr)
    m = _pad(mom, grl * gul, grr * gur)
    v = _pad(u, gul, gur)
    vac = r < rho_vac

    c = np.sqrt(gamma * r ** (gamma - 1.0))
    speed = np.abs(v) + c
    p = r**gamma
    fm = m * v + p

    rl, rr = r[:-1], r[1:]
    s = np.maximum(speed[:-1], speed[1:])
    f_rho = 0.5 * (m[:-1] + m[1:]) - 0.5 * s * (rr - rl)
    f_mom = 0.5 * (fm[:-1] + fm[1:]) - 0.5 * s * (m[1:] - m[:-1])

    mu = 0.5 * (rl**delta + rr**delta)
    mu[vac[:-1] | vac[1:]] = 0.0
    f_mom -= mu * ((v[1:] - v[:-1]) * idx)

    drho = (f_rho[:-1] - f_rho[1:]) * idx
    dmom = (f_mom[:-1] - f_mom[1:]) * idx

    vi = v[1:-1]
    back = (vi - v[:-2]) * idx
    fwd = (v[2:] - vi) * idx
    du_vac = -vi * np.where(vi > 0.0, back, fwd)
    return drho, dmom, du_vac, f_rho[0], f_rho[-1]


def _euler_stage(rho, mom, u, dt, dx, gamma, delta, rho_vac, src_rho, src_mom, ghost):
    drho, dmom, du_vac, fl, fr = stage_rhs(rho, mom, u, dx, gamma, delta, rho_vac, ghost)
    if src_rho is not None:
        drho = drho + src_rho
        dmom = dmom + src_mom
    r1 = rho + dt * drho
    m1 = mom + dt * dmom
    neg = r1 < 0.0
    clipped = -float(np.sum(r1[neg])) * dx
    r1[neg] = 0.0
    vac = r1 < rho_vac
    u1 = np.empty_like(u)
    live = ~vac
    u1[live] = m1[live] / r1[live]
    u1[vac] = u[vac] + dt * du_vac[vac]
    m1[vac] = r1[vac] * u1[vac]
    outflow = dt * (fr - fl)
    return r1, m1, u1, clipped, outflow


def ssprk2_step(rho, mom, u, dt, dx, gamma, delta, rho_vac,
                src0=None, src1=None, ghost0=None, ghost1=None):
    """One Heun (SSP-RK2) step.

    ``src0``/``src1`` are optional ``(s_rho, s_mom)`` source arrays and
    ``ghost0``/``ghost1`` optional ghost states for the two stages.
    Returns ``(rho, mom, u, rho_stage, u_stage, mass_defect, outflow)``.
    The stage fields are exposed so particle paths can use matching stages.
    """
    s0r, s0m = (None, None) if src0 is None else src0
    s1r, s1m = (None, None) if src1 is None else src1
    r1, m1, u1, clip1, out1 = _euler_stage(rho, mom, u, dt, dx, gamma, delta,
                                           rho_vac, s0r, s0m, ghost0 or ZERO_GHOST)
    r2, m2, u2, clip2, out2 = _euler_stage(r1, m1, u1, dt, dx, gamma, delta,
                                           rho_vac, s1r, s1m, ghost1 or ZERO_GHOST)
    rn = 0.5 * (rho + r2)
    mn = 0.5 * (mom + m2)
    vac = rn < rho_vac
    un = np.empty_like(u)
    live = ~vac
    un[live] = mn[live] / rn[live]
    un[vac] = 0.5 * (u[vac] + u2[vac])
    mn[vac] = rn[vac] * un[vac]
    defect = 0.5 * clip1 + clip2 * 0.5
    outflow = 0.5 * (out1 + out2)
    return rn, mn, un, r1, u1, defect, outflow


def interp_cells(values, x, x_min, dx):
    """Piecewise-linear interpolation of cell-centred values, clamped at the ends."""
    n = values.size
    s = (np.asarray(x, dtype=float) - x_min) / dx - 0.5
    s = np.clip(s, 0.0, n - 1.0)
    i = np.minimum(s.astype(np.int64), n - 2)
    w = s - i
    return (1.0 - w) * values[i] + w * values[i + 1]


def advance_points(y, u0, u1, dt, x_min, dx):
    """Heun step for tracers given the two stage velocity fields."""
    k0 = interp_cells(u0, y, x_min, dx)
    k1 = interp_cells(u1, y + dt * k0, x_min, dx)
    return y + 0.5 * dt * (k0 + k1)


def face_dissipation(rho, u, dx, delta, rho_vac):
    """Discrete viscous dissipation ``sum_faces mu_face (du/dx)^2 dx`` using
    the same face coefficients as the momentum update."""
    r = _pad(rho)
    v = _pad(u)
    vac = r < rho_vac
    rd = r**delta
    mu = 0.5 * (rd[:-1] + rd[1:])
    mu[vac[:-1] | vac[1:]] = 0.0
    g = (v[1:] - v[:-1]) / dx
    return float(np.sum(mu * g * g) * dx)
