"""Hot loops: the exponential RK4 stepper for eigenfunction legs and the PDE right-hand side.

Each routine has a numba version and a plain numpy version with the same
arithmetic.  The public wrappers dispatch to numba unless
``CMNLS_PURE_NUMPY`` is set; the ``*_numpy`` functions are always available
for comparison.
"""

from __future__ import annotations

import numpy as np

from ._accel import USE_NUMBA, njit

# --------------------------------------------------------------------------
# phi-function coefficients of the Cox-Matthews ETDRK4 scheme

_NCONTOUR = 32
_ROOTS = np.exp(2j * np.pi * (np.arange(1, _NCONTOUR + 1) - 0.5) / _NCONTOUR)


def etd_coefficients(c, h):
    """Coefficients of ETDRK4 for the diagonal rates ``c`` and step ``h``.

    Returns ``(E, E2, Qf, f1, f2, f3)`` with the same shape as ``c``.  For
    ``|c h| < 1`` the phi functions are evaluated as means over a small
    circle around ``c h`` to avoid cancellation.
    """
    c = np.asarray(c, dtype=complex)
    z = c * h
    E = np.exp(z)
    E2 = np.exp(z / 2)
    Qf = np.empty_like(z)
    f1 = np.empty_like(z)
    f2 = np.empty_like(z)
    f3 = np.empty_like(z)

    small = np.abs(z) < 1.0
    big = ~small
    zb = z[big]
    if zb.size:
        Eb = E[big]
        Qf[big] = h * (E2[big] - 1) / zb
        f1[big] = h * (-4 - zb + Eb * (4 - 3 * zb + zb * zb)) / zb ** 3
        f2[big] = h * (2 + zb + Eb * (zb - 2)) / zb ** 3
        f3[big] = h * (-4 - 3 * zb - zb * zb + Eb * (4 - zb)) / zb ** 3
    zs = z[small]
    if zs.size:
        r = zs[:, None] + _ROOTS[None, :]
        er = np.exp(r)
        Qf[small] = h * np.mean((np.exp(r / 2) - 1) / r, axis=1)
        f1[small] = h * np.mean((-4 - r + er * (4 - 3 * r + r * r)) / r ** 3, axis=1)
        f2[small] = h * np.mean((2 + r + er * (r - 2)) / r ** 3, axis=1)
        f3[small] = h * np.mean((-4 - 3 * r - r * r + er * (4 - r)) / r ** 3, axis=1)
    return E, E2, Qf, f1, f2, f3


# --------------------------------------------------------------------------
# ETDRK4 along one leg:  Y' = C o Y + Q(s) Y   (C acts entrywise)

def _etdrk4_leg_numpy(Y0, E, E2, Qf, f1, f2, f3, Qs):
    Y = Y0.copy()
    nsteps = (Qs.shape[0] - 1) // 2
    for n in range(nsteps):
        Q0 = Qs[2 * n]
        Qh = Qs[2 * n + 1]
        Q1 = Qs[2 * n + 2]
        Nu = Q0 @ Y
        a = E2 * Y + Qf * Nu
        Na = Qh @ a
        b = E2 * Y + Qf * Na
        Nb = Qh @ b
        c = E2 * a + Qf * (2 * Nb - Nu)
        Nc = Q1 @ c
        Y = E * Y + f1 * Nu + 2 * f2 * (Na + Nb) + f3 * Nc
    return Y


@njit
def _matmul3(A, B, out):
    for i in range(3):
        for j in range(B.shape[1]):
            acc = 0j
            for m in range(3):
                acc += A[i, m] * B[m, j]
            out[i, j] = acc


@njit
def _etdrk4_leg_numba(Y0, E, E2, Qf, f1, f2, f3, Qs):
    ncol = Y0.shape[1]
    Y = Y0.copy()
    Nu = np.empty_like(Y)
    Na = np.empty_like(Y)
    Nb = np.empty_like(Y)
    Nc = np.empty_like(Y)
    a = np.empty_like(Y)
    b = np.empty_like(Y)
    c = np.empty_like(Y)
    nsteps = (Qs.shape[0] - 1) // 2
    for n in range(nsteps):
        _matmul3(Qs[2 * n], Y, Nu)
        for i in range(3):
            for j in range(ncol):
                a[i, j] = E2[i, j] * Y[i, j] + Qf[i, j] * Nu[i, j]
        _matmul3(Qs[2 * n + 1], a, Na)
        for i in range(3):
            for j in range(ncol):
                b[i, j] = E2[i, j] * Y[i, j] + Qf[i, j] * Na[i, j]
        _matmul3(Qs[2 * n + 1], b, Nb)
        for i in range(3):
            for j in range(ncol):
                c[i, j] = E2[i, j] * a[i, j] + Qf[i, j] * (2 * Nb[i, j] - Nu[i, j])
        _matmul3(Qs[2 * n + 2], c, Nc)
        for i in range(3):
            for j in range(ncol):
                Y[i, j] = (E[i, j] * Y[i, j] + f1[i, j] * Nu[i, j]
                           + 2 * f2[i, j] * (Na[i, j] + Nb[i, j]) + f3[i, j] * Nc[i, j])
    return Y


def etdrk4_leg_numpy(Y0, E, E2, Qf, f1, f2, f3, Qs):
    """Pure-numpy reference of :func:`etdrk4_leg`."""
    return _etdrk4_leg_numpy(Y0, E, E2, Qf, f1, f2, f3, Qs)


def etdrk4_leg(Y0, E, E2, Qf, f1, f2, f3, Qs):
    """Advance ``Y0`` (3 x ncol) across ``(len(Qs) - 1) // 2`` ETDRK4 steps.

    ``Qs`` holds the coupling matrix at every step node and half node; the
    coefficient arrays come from :func:`etd_coefficients` applied to the
    entrywise rates of the matching columns.
    """
    args = [np.ascontiguousarray(a, dtype=complex) for a in (Y0, E, E2, Qf, f1, f2, f3, Qs)]
    if USE_NUMBA:
        return _etdrk4_leg_numba(*args)
    return _etdrk4_leg_numpy(*args)


# --------------------------------------------------------------------------
# PDE right-hand side:  u_t = i u_xx + i delta rho u - gamma (rho u)_x
# 4th-order centred stencils; the derivative term uses the skew form
#   (rho u)_x ~ [D(rho u) + rho D u + u D rho] / 2
# which keeps the discrete mass sum(|u|^2 + |v|^2) exactly invariant in time.

def _pad(a, periodic):
    if periodic:
        return np.concatenate([a[-2:], a, a[:2]])
    z = np.zeros(2, dtype=a.dtype)
    return np.concatenate([z, a, z])


def _d1_numpy(a, dx, periodic):
    p = _pad(a, periodic)
    return (p[:-4] - 8 * p[1:-3] + 8 * p[3:-1] - p[4:]) / (12.0 * dx)


def _d2_numpy(a, dx, periodic):
    p = _pad(a, periodic)
    return (-p[:-4] + 16 * p[1:-3] - 30 * p[2:-2] + 16 * p[3:-1] - p[4:]) / (12.0 * dx * dx)


def _rhs_numpy(u, v, dx, delta, gamma, periodic):
    rho = (u * np.conj(u)).real + (v * np.conj(v)).real
    drho = _d1_numpy(rho.astype(complex), dx, periodic)
    out = []
    for w in (u, v):
        rw = rho * w
        skew = 0.5 * (_d1_numpy(rw, dx, periodic) + rho * _d1_numpy(w, dx, periodic) + w * drho)
        out.append(1j * _d2_numpy(w, dx, periodic) + 1j * delta * rw - gamma * skew)
    return out[0], out[1]


@njit
def _fill_padded(a, p, periodic):
    n = a.shape[0]
    for i in range(n):
        p[i + 2] = a[i]
    if periodic:
        p[0] = a[n - 2]
        p[1] = a[n - 1]
        p[n + 2] = a[0]
        p[n + 3] = a[1]
    else:
        p[0] = 0.0
        p[1] = 0.0
        p[n + 2] = 0.0
        p[n + 3] = 0.0


@njit
def _rhs_into(u, v, dx, delta, gamma, periodic, pu, pv, prho, pru, prv, du, dv):
    n = u.shape[0]
    _fill_padded(u, pu, periodic)
    _fill_padded(v, pv, periodic)
    for i in range(n + 4):
        r = pu[i].real ** 2 + pu[i].imag ** 2 + pv[i].real ** 2 + pv[i].imag ** 2
        prho[i] = r
        pru[i] = r * pu[i]
        prv[i] = r * pv[i]
    c1 = 1.0 / (12.0 * dx)
    c2 = 1.0 / (12.0 * dx * dx)
    for i in range(n):
        j = i + 2
        d1u = (pu[j - 2] - 8 * pu[j - 1] + 8 * pu[j + 1] - pu[j + 2]) * c1
        d1v = (pv[j - 2] - 8 * pv[j - 1] + 8 * pv[j + 1] - pv[j + 2]) * c1
        d2u = (-pu[j - 2] + 16 * pu[j - 1] - 30 * pu[j] + 16 * pu[j + 1] - pu[j + 2]) * c2
        d2v = (-pv[j - 2] + 16 * pv[j - 1] - 30 * pv[j] + 16 * pv[j + 1] - pv[j + 2]) * c2
        d1rho = (prho[j - 2] - 8 * prho[j - 1] + 8 * prho[j + 1] - prho[j + 2]) * c1
        d1ru = (pru[j - 2] - 8 * pru[j - 1] + 8 * pru[j + 1] - pru[j + 2]) * c1
        d1rv = (prv[j - 2] - 8 * prv[j - 1] + 8 * prv[j + 1] - prv[j + 2]) * c1
        r = prho[j]
        du[i] = 1j * d2u + 1j * delta * pru[j] - gamma * 0.5 * (d1ru + r * d1u + pu[j] * d1rho)
        dv[i] = 1j * d2v + 1j * delta * prv[j] - gamma * 0.5 * (d1rv + r * d1v + pv[j] * d1rho)


@njit
def _rhs_numba(u, v, dx, delta, gamma, periodic):
    n = u.shape[0]
    pu = np.empty(n + 4, dtype=np.complex128)
    pv = np.empty(n + 4, dtype=np.complex128)
    prho = np.empty(n + 4, dtype=np.float64)
    pru = np.empty(n + 4, dtype=np.complex128)
    prv = np.empty(n + 4, dtype=np.complex128)
    du = np.empty(n, dtype=np.complex128)
    dv = np.empty(n, dtype=np.complex128)
    _rhs_into(u, v, dx, delta, gamma, periodic, pu, pv, prho, pru, prv, du, dv)
    return du, dv


def cmnls_rhs_numpy(u, v, dx, delta, gamma, periodic=False):
    """Pure-numpy reference of :func:`cmnls_rhs`."""
    return _rhs_numpy(u, v, dx, delta, gamma, periodic)


def cmnls_rhs(u, v, dx, delta, gamma, periodic=False):
    """Semi-discrete right-hand side ``(u_t, v_t)`` on a uniform grid.

    Outside the grid the fields are taken as zero (or wrapped when
    ``periodic``).
    """
    if USE_NUMBA:
        return _rhs_numba(np.ascontiguousarray(u, dtype=complex), np.ascontiguousarray(v, dtype=complex),
                          float(dx), float(delta), float(gamma), bool(periodic))
    return _rhs_numpy(np.asarray(u, dtype=complex), np.asarray(v, dtype=complex),
                      dx, delta, gamma, periodic)


# --------------------------------------------------------------------------
# classical RK4 over several steps

def _rk4_advance_numpy(u, v, nsteps, h, dx, delta, gamma, periodic):
    for _ in range(nsteps):
        k1u, k1v = _rhs_numpy(u, v, dx, delta, gamma, periodic)
        k2u, k2v = _rhs_numpy(u + 0.5 * h * k1u, v + 0.5 * h * k1v, dx, delta, gamma, periodic)
        k3u, k3v = _rhs_numpy(u + 0.5 * h * k2u, v + 0.5 * h * k2v, dx, delta, gamma, periodic)
        k4u, k4v = _rhs_numpy(u + h * k3u, v + h * k3v, dx, delta, gamma, periodic)
        u = u + h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u)
        v = v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return u, v


@njit
def _rk4_advance_numba(u, v, nsteps, h, dx, delta, gamma, periodic):
    n = u.shape[0]
    u = u.copy()
    v = v.copy()
    pu = np.empty(n + 4, dtype=np.complex128)
    pv = np.empty(n + 4, dtype=np.complex128)
    prho = np.empty(n + 4, dtype=np.float64)
    pru = np.empty(n + 4, dtype=np.complex128)
    prv = np.empty(n + 4, dtype=np.complex128)
    ku = np.empty((4, n), dtype=np.complex128)
    kv = np.empty((4, n), dtype=np.complex128)
    wu = np.empty(n, dtype=np.complex128)
    wv = np.empty(n, dtype=np.complex128)
    for _ in range(nsteps):
        _rhs_into(u, v, dx, delta, gamma, periodic, pu, pv, prho, pru, prv, ku[0], kv[0])
        for i in range(n):
            wu[i] = u[i] + 0.5 * h * ku[0, i]
            wv[i] = v[i] + 0.5 * h * kv[0, i]
        _rhs_into(wu, wv, dx, delta, gamma, periodic, pu, pv, prho, pru, prv, ku[1], kv[1])
        for i in range(n):
            wu[i] = u[i] + 0.5 * h * ku[1, i]
            wv[i] = v[i] + 0.5 * h * kv[1, i]
        _rhs_into(wu, wv, dx, delta, gamma, periodic, pu, pv, prho, pru, prv, ku[2], kv[2])
        for i in range(n):
            wu[i] = u[i] + h * ku[2, i]
            wv[i] = v[i] + h * kv[2, i]
        _rhs_into(wu, wv, dx, delta, gamma, periodic, pu, pv, prho, pru, prv, ku[3], kv[3])
        for i in range(n):
            u[i] = u[i] + h / 6.0 * (ku[0, i] + 2 * ku[1, i] + 2 * ku[2, i] + ku[3, i])
            v[i] = v[i] + h / 6.0 * (kv[0, i] + 2 * kv[1, i] + 2 * kv[2, i] + kv[3, i])
    return u, v


def rk4_advance_numpy(u, v, nsteps, h, dx, delta, gamma, periodic=False):
    """Pure-numpy reference of :func:`rk4_advance`."""
    return _rk4_advance_numpy(np.asarray(u, dtype=complex), np.asarray(v, dtype=complex),
                              int(nsteps), h, dx, delta, gamma, periodic)


def rk4_advance(u, v, nsteps, h, dx, delta, gamma, periodic=False):
    """``nsteps`` classical RK4 steps of size ``h`` for the semi-discrete system."""
    if USE_NUMBA:
        return _rk4_advance_numba(np.ascontiguousarray(u, dtype=complex), np.ascontiguousarray(v, dtype=complex),
                                  int(nsteps), float(h), float(dx), float(delta), float(gamma), bool(periodic))
    return rk4_advance_numpy(u, v, nsteps, h, dx, delta, gamma, periodic)
