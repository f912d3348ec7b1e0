# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels. Same arithmetic as ``_pykernels``, fused into C loops."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, pow, fabs

cnp.import_array()


cdef inline double _pw(double x, double e) noexcept nogil:
    # exponents numpy also special-cases; keeps both backends bit-identical
    if e == 2.0:
        return x * x
    if e == 1.0:
        return x
    if e == 0.5:
        return sqrt(x)
    return pow(x, e)


cdef void _stage(const double[::1] r, const double[::1] m, const double[::1] v,
                 double[::1] r1, double[::1] m1, double[::1] v1,
                 double[::1] frho, double[::1] fmom,
                 double[::1] re, double[::1] me, double[::1] ve,
                 double[::1] spd, double[::1] fmc, double[::1] rdl,
                 double dt, double dx, double gamma, double delta, double rho_vac,
                 const double[::1] sr, const double[::1] sm, bint has_src,
                 double gr0, double gu0, double gr1, double gu1,
                 double* clipped, double* outflow) noexcept nogil:
    # work arrays carry one ghost per side: cell i lives at index i + 1
    cdef Py_ssize_t n = r.shape[0]
    cdef Py_ssize_t i, j
    cdef double idx = 1.0 / dx
    cdef double ri, s, mu, du, clip = 0.0

    re[0] = gr0; me[0] = gr0 * gu0; ve[0] = gu0
    re[n + 1] = gr1; me[n + 1] = gr1 * gu1; ve[n + 1] = gu1
    for i in range(n):
        re[i + 1] = r[i]; me[i + 1] = m[i]; ve[i + 1] = v[i]

    for i in range(n + 2):
        ri = re[i]
        spd[i] = fabs(ve[i]) + sqrt(gamma * _pw(ri, gamma - 1.0))
        fmc[i] = me[i] * ve[i] + _pw(ri, gamma)
        rdl[i] = _pw(ri, delta)

    for j in range(n + 1):
        s = spd[j] if spd[j] > spd[j + 1] else spd[j + 1]
        frho[j] = 0.5 * (me[j] + me[j + 1]) - 0.5 * s * (re[j + 1] - re[j])
        fmom[j] = 0.5 * (fmc[j] + fmc[j + 1]) - 0.5 * s * (me[j + 1] - me[j])
        if re[j] >= rho_vac and re[j + 1] >= rho_vac:
            mu = 0.5 * (rdl[j] + rdl[j + 1])
            fmom[j] = fmom[j] - mu * ((ve[j + 1] - ve[j]) * idx)

    if has_src:
        for i in range(n):
            r1[i] = r[i] + dt * ((frho[i] - frho[i + 1]) * idx + sr[i])
            m1[i] = m[i] + dt * ((fmom[i] - fmom[i + 1]) * idx + sm[i])
    else:
        for i in range(n):
            r1[i] = r[i] + dt * ((frho[i] - frho[i + 1]) * idx)
            m1[i] = m[i] + dt * ((fmom[i] - fmom[i + 1]) * idx)

    for i in range(n):
        if r1[i] < 0.0:
            clip -= r1[i]
            r1[i] = 0.0
        if r1[i] < rho_vac:
            if ve[i + 1] > 0.0:
                du = -ve[i + 1] * ((ve[i + 1] - ve[i]) * idx)
            else:
                du = -ve[i + 1] * ((ve[i + 2] - ve[i + 1]) * idx)
            v1[i] = v[i] + dt * du
            m1[i] = r1[i] * v1[i]
        else:
            v1[i] = m1[i] / r1[i]

    clipped[0] = clip * dx
    outflow[0] = dt * (frho[n] - frho[0])


def ssprk2_step(const double[::1] rho, const double[::1] mom, const double[::1] u,
                double dt, double dx, double gamma, double delta, double rho_vac,
                src0=None, src1=None, ghost0=None, ghost1=None):
    """One Heun (SSP-RK2) step; see ``_pykernels.ssprk2_step``."""
    cdef Py_ssize_t n = rho.shape[0]
    cdef Py_ssize_t i
    cdef double clip1 = 0.0, clip2 = 0.0, out1 = 0.0, out2 = 0.0
    cdef bint has0 = src0 is not None
    cdef bint has1 = src1 is not None
    cdef const double[::1] s0r, s0m, s1r, s1m
    cdef double[::1] dummy = np.zeros(1)

    r1a = np.empty(n); m1a = np.empty(n); u1a = np.empty(n)
    r2a = np.empty(n); m2a = np.empty(n); u2a = np.empty(n)
    cdef double[::1] r1 = r1a, m1 = m1a, u1 = u1a
    cdef double[::1] r2 = r2a, m2 = m2a, u2 = u2a
    cdef double[::1] frho = np.empty(n + 1), fmom = np.empty(n + 1)
    cdef double[::1] re = np.empty(n + 2), me = np.empty(n + 2), ve = np.empty(n + 2)
    cdef double[::1] spd = np.empty(n + 2), fmc = np.empty(n + 2), rdl = np.empty(n + 2)

    s0r = np.ascontiguousarray(src0[0], dtype=np.float64) if has0 else dummy
    s0m = np.ascontiguousarray(src0[1], dtype=np.float64) if has0 else dummy
    s1r = np.ascontiguousarray(src1[0], dtype=np.float64) if has1 else dummy
    s1m = np.ascontiguousarray(src1[1], dtype=np.float64) if has1 else dummy

    cdef double a0, b0, c0, d0, a1, b1, c1, d1
    a0, b0, c0, d0 = ghost0 if ghost0 is not None else (0.0, 0.0, 0.0, 0.0)
    a1, b1, c1, d1 = ghost1 if ghost1 is not None else (0.0, 0.0, 0.0, 0.0)

    with nogil:
        _stage(rho, mom, u, r1, m1, u1, frho, fmom, re, me, ve, spd, fmc, rdl,
               dt, dx, gamma, delta, rho_vac, s0r, s0m, has0, a0, b0, c0, d0,
               &clip1, &out1)
        _stage(r1, m1, u1, r2, m2, u2, frho, fmom, re, me, ve, spd, fmc, rdl,
               dt, dx, gamma, delta, rho_vac, s1r, s1m, has1, a1, b1, c1, d1,
               &clip2, &out2)
        for i in range(n):
            r2[i] = 0.5 * (rho[i] + r2[i])
            m2[i] = 0.5 * (mom[i] + m2[i])
            if r2[i] < rho_vac:
                u2[i] = 0.5 * (u[i] + u2[i])
                m2[i] = r2[i] * u2[i]
            else:
                u2[i] = m2[i] / r2[i]

    return (r2a, m2a, u2a, r1a, u1a, 0.5 * clip1 + clip2 * 0.5, 0.5 * (out1 + out2))


cdef inline double _interp(const double[::1] f, double x, double x_min, double dx) noexcept nogil:
    cdef Py_ssize_t n = f.shape[0]
    cdef double s = (x - x_min) / dx - 0.5
    cdef Py_ssize_t i
    cdef double w
    if s < 0.0:
        s = 0.0
    elif s > n - 1.0:
        s = n - 1.0
    i = <Py_ssize_t>s
    if i > n - 2:
        i = n - 2
    w = s - i
    return (1.0 - w) * f[i] + w * f[i + 1]


def interp_cells(const double[::1] values, x, double x_min, double dx):
    cdef const double[::1] xs = np.ascontiguousarray(np.atleast_1d(x), dtype=np.float64)
    out = np.empty(xs.shape[0])
    cdef double[::1] o = out
    cdef Py_ssize_t k
    for k in range(xs.shape[0]):
        o[k] = _interp(values, xs[k], x_min, dx)
    if np.ndim(x) == 0:
        return float(out[0])
    return out


def advance_points(const double[::1] y, const double[::1] u0, const double[::1] u1,
                   double dt, double x_min, double dx):
    """Heun step for tracers given the two stage velocity fields."""
    cdef Py_ssize_t k, m = y.shape[0]
    cdef double k0, k1
    out = np.empty(m)
    cdef double[::1] o = out
    with nogil:
        for k in range(m):
            k0 = _interp(u0, y[k], x_min, dx)
            k1 = _interp(u1, y[k] + dt * k0, x_min, dx)
            o[k] = y[k] + 0.5 * dt * (k0 + k1)
    return out
