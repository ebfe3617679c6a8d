"""Hot loops: batched TE characteristic-matrix products and implicit heat stepping.

Every kernel exists twice, a numba version (``*_numba``) and a numpy/scipy
version (``*_numpy``). The public names dispatch on ``hompcm._accel.USE_NUMBA``.
Both paths agree to rounding; tests compare them directly.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

from ._accel import USE_NUMBA, njit

_BRANCH_TOL = 1e-14


# --------------------------------------------------------------------------
# normal wavevector branch
# --------------------------------------------------------------------------

def kz_branch(z):
    """Square root with Im >= 0 (decaying/outgoing under exp(-i w t)).

    Works elementwise on arrays or on scalars.
    """
    s = np.sqrt(np.asarray(z, dtype=complex))
    flip = s.imag < -_BRANCH_TOL * np.abs(s)
    return np.where(flip, -s, s)


@njit(cache=True)
def _kz_scalar(z):
    s = np.sqrt(z)
    if s.imag < -_BRANCH_TOL * abs(s):
        s = -s
    return s


# --------------------------------------------------------------------------
# TE multilayer (Abeles characteristic matrix), batched over wavelengths
# --------------------------------------------------------------------------

@njit(cache=True)
def tmm_te_numba(eps_in, eps_layers, thickness_nm, eps_out, k0, beta2):
    nw = k0.shape[0]
    nl = thickness_nm.shape[0]
    r = np.empty(nw, dtype=np.complex128)
    t = np.empty(nw, dtype=np.complex128)
    for w in range(nw):
        p_in = _kz_scalar(eps_in[w] - beta2[w])
        p_out = _kz_scalar(eps_out[w] - beta2[w])
        m11 = 1.0 + 0.0j
        m12 = 0.0j
        m21 = 0.0j
        m22 = 1.0 + 0.0j
        for j in range(nl):
            p = _kz_scalar(eps_layers[j, w] - beta2[w])
            delta = k0[w] * p * thickness_nm[j]
            c = np.cos(delta)
            s = np.sin(delta)
            a11 = c
            a12 = -1j * s / p
            a21 = -1j * p * s
            a22 = c
            n11 = m11 * a11 + m12 * a21
            n12 = m11 * a12 + m12 * a22
            n21 = m21 * a11 + m22 * a21
            n22 = m21 * a12 + m22 * a22
            m11, m12, m21, m22 = n11, n12, n21, n22
        b = m11 + m12 * p_out
        cc = m21 + m22 * p_out
        den = p_in * b + cc
        r[w] = (p_in * b - cc) / den
        tt = 2.0 * p_in / den
        if p_out.real <= 0.0:
            t[w] = 0.0j
        else:
            t[w] = tt * np.sqrt(p_out.real / p_in.real)
    return r, t


def tmm_te_numpy(eps_in, eps_layers, thickness_nm, eps_out, k0, beta2):
    p_in = kz_branch(eps_in - beta2)
    p_out = kz_branch(eps_out - beta2)
    nw = k0.shape[0]
    m11 = np.ones(nw, complex)
    m12 = np.zeros(nw, complex)
    m21 = np.zeros(nw, complex)
    m22 = np.ones(nw, complex)
    for j in range(thickness_nm.shape[0]):
        p = kz_branch(eps_layers[j] - beta2)
        delta = k0 * p * thickness_nm[j]
        c, s = np.cos(delta), np.sin(delta)
        a12 = -1j * s / p
        a21 = -1j * p * s
        m11, m12, m21, m22 = (m11 * c + m12 * a21, m11 * a12 + m12 * c,
                              m21 * c + m22 * a21, m21 * a12 + m22 * c)
    b = m11 + m12 * p_out
    cc = m21 + m22 * p_out
    den = p_in * b + cc
    r = (p_in * b - cc) / den
    t = 2.0 * p_in / den
    propagating = p_out.real > 0.0
    scale = np.sqrt(np.where(propagating, p_out.real, 0.0) / p_in.real)
    t = np.where(propagating, t * scale, 0.0j)
    return r, t


def tmm_te(eps_in, eps_layers, thickness_nm, eps_out, k0, beta2):
    """Reflection and flux-normalized transmission of a TE multilayer.

    Parameters
    ----------
    eps_in, eps_out : complex array (nw,)
        Permittivity of the incidence and exit half-spaces.
    eps_layers : complex array (nl, nw)
        Layer permittivities, incidence side first.
    thickness_nm : float array (nl,)
    k0 : float array (nw,)
        Vacuum wavenumber in 1/nm.
    beta2 : float array (nw,)
        Squared normalized tangential wavevector, (n_in sin theta)^2.

    Returns
    -------
    r, t : complex arrays (nw,)
        ``t`` carries the factor sqrt(Re p_out / Re p_in) so |t|^2 is the
        power transmittance; it is zero when the exit wave is evanescent.
    """
    eps_in = np.ascontiguousarray(eps_in, dtype=complex)
    args = (eps_in,
            np.ascontiguousarray(eps_layers, dtype=complex).reshape(len(thickness_nm), eps_in.size),
            np.ascontiguousarray(thickness_nm, dtype=float),
            np.ascontiguousarray(eps_out, dtype=complex),
            np.ascontiguousarray(k0, dtype=float),
            np.ascontiguousarray(beta2, dtype=float))
    if USE_NUMBA:
        return tmm_te_numba(*args)
    return tmm_te_numpy(*args)


# --------------------------------------------------------------------------
# 1D implicit conduction (finite volume, backward Euler)
# --------------------------------------------------------------------------

@njit(cache=True)
def heat_implicit_numba(cap, cond, weights, power, dt, temp0, t_amb):
    n = cap.shape[0]
    nt = dt.shape[0]
    out = np.empty((nt + 1, n))
    out[0, :] = temp0
    sub = np.empty(n)
    diag = np.empty(n)
    sup = np.empty(n)
    rhs = np.empty(n)
    cp = np.empty(n)
    dp = np.empty(n)
    for step in range(nt):
        h = dt[step]
        for i in range(n):
            sub[i] = -h * cond[i]
            sup[i] = -h * cond[i + 1]
            diag[i] = cap[i] + h * (cond[i] + cond[i + 1])
            rhs[i] = cap[i] * out[step, i] + h * power[step] * weights[i]
        sub[0] = 0.0
        sup[n - 1] = 0.0
        rhs[0] += h * cond[0] * t_amb
        rhs[n - 1] += h * cond[n] * t_amb
        # Thomas sweep
        cp[0] = sup[0] / diag[0]
        dp[0] = rhs[0] / diag[0]
        for i in range(1, n):
            m = diag[i] - sub[i] * cp[i - 1]
            cp[i] = sup[i] / m
            dp[i] = (rhs[i] - sub[i] * dp[i - 1]) / m
        out[step + 1, n - 1] = dp[n - 1]
        for i in range(n - 2, -1, -1):
            out[step + 1, i] = dp[i] - cp[i] * out[step + 1, i + 1]
    return out


def heat_implicit_numpy(cap, cond, weights, power, dt, temp0, t_amb):
    n = cap.shape[0]
    out = np.empty((dt.shape[0] + 1, n))
    out[0] = temp0
    ab = np.zeros((3, n))
    for step, h in enumerate(dt):
        ab[0, 1:] = -h * cond[1:n]
        ab[1] = cap + h * (cond[:-1] + cond[1:])
        ab[2, :-1] = -h * cond[1:n]
        rhs = cap * out[step] + h * power[step] * weights
        rhs[0] += h * cond[0] * t_amb
        rhs[-1] += h * cond[n] * t_amb
        out[step + 1] = solve_banded((1, 1), ab, rhs)
    return out


def heat_implicit(cap, cond, weights, power, dt, temp0, t_amb):
    """Backward-Euler march of ``cap dT/dt = div(cond grad T) + power * weights``.

    Parameters
    ----------
    cap : (n,) heat capacity per unit area of each cell, J/(m^2 K)
    cond : (n+1,) face conductances, W/(m^2 K); ``cond[0]`` and ``cond[n]``
        couple the end cells to ``t_amb`` (zero means insulated).
    weights : (n,) share of the areal source deposited in each cell, sums to 1
    power : (nt,) step-averaged areal source, W/m^2
    dt : (nt,) step lengths, s
    temp0 : (n,) initial temperature, K

    Returns the (nt+1, n) temperature history.
    """
    args = [np.ascontiguousarray(a, dtype=float) for a in (cap, cond, weights, power, dt, temp0)]
    if USE_NUMBA:
        return heat_implicit_numba(*args, float(t_amb))
    return heat_implicit_numpy(*args, float(t_amb))
