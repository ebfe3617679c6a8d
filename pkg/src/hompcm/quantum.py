"""Two-photon coincidence statistics of a 2x2 network.

Detector efficiency and |G(0)|^2 are normalized to one, so every quantity is a
probability ratio or a baseline-normalized count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .network import NetworkMatrix

NEGATIVE_TOL = 1e-12
BASELINE_FLOOR = 1e-15
NORM_TOL = 1e-9
PHASE_SNAP = 1e-12


class QuantumError(ValueError):
    pass


def _entries(T):
    if isinstance(T, NetworkMatrix):
        return T.t1, T.t2, T.t3, T.t4
    m = np.asarray(T, dtype=complex)
    return m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]


def interference_term(T):
    """t1 t4 conj(t2 t3): the exchange amplitude product entering every formula here."""
    t1, t2, t3, t4 = _entries(T)
    return t1 * t4 * np.conj(t2 * t3)


def baseline(T):
    """Coincidence probability for fully distinguishable photons."""
    t1, t2, t3, t4 = _entries(T)
    return np.abs(t2) ** 2 * np.abs(t3) ** 2 + np.abs(t1) ** 2 * np.abs(t4) ** 2


def joint_probability(T, overlap=1.0):
    """P(1_a, 1_b) for a two-photon input with exchange overlap ``overlap``.

    A complex overlap enters as 2 Re{t1 t4 t2* t3* overlap}; for exchange
    symmetric sources it is real and this is the textbook expression.
    """
    if np.any(np.abs(overlap) > 1 + NORM_TOL):
        raise QuantumError(f"overlap magnitude exceeds 1: {overlap}")
    p = baseline(T) + 2 * np.real(interference_term(T) * overlap)
    if np.any(p < -NEGATIVE_TOL):
        raise QuantumError(f"negative joint probability {np.min(p)}: network is not passive")
    return p


def coalescence(T):
    """(baseline - P)/baseline at unit overlap; > 0 bunching (dip), < 0 antibunching (peak)."""
    b = baseline(T)
    if np.any(b <= BASELINE_FLOOR):
        raise QuantumError("baseline vanishes; coalescence undefined")
    return -2 * np.real(interference_term(T)) / b


def total_phase(T):
    """angle(t2) + angle(t3) - angle(t1) - angle(t4), wrapped into (-pi, pi]."""
    t1, t2, t3, t4 = _entries(T)
    if np.any(np.array([np.abs(t1), np.abs(t2), np.abs(t3), np.abs(t4)]) == 0):
        raise QuantumError("total phase undefined: a network entry is zero")
    raw = np.angle(t2) + np.angle(t3) - np.angle(t1) - np.angle(t4)
    wrapped = np.pi - np.mod(np.pi - raw, 2 * np.pi)
    # -pi is outside the half-open range; rounding can land a true pi there
    return np.where(wrapped < -np.pi + PHASE_SNAP, np.pi, wrapped)[()]


# --------------------------------------------------------------------------
# spectral amplitudes
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralAmplitude:
    """Two-photon spectral amplitude, either the Gaussian SPDC form or a sampled grid.

    The Gaussian kind is parametrized by pump frequency and bandwidth (rad/s)
    and implies g(tau) = exp(-(bandwidth tau)^2 / 2). The sampled kind holds
    psi on a square mesh, ``psi[i, j] = psi(omega[i], omega[j])``.
    """

    kind: str
    pump_frequency: float = 0.0
    bandwidth: float = 0.0
    omega: np.ndarray | None = None
    psi: np.ndarray | None = None

    @classmethod
    def gaussian(cls, pump_frequency: float, bandwidth: float) -> "SpectralAmplitude":
        if bandwidth <= 0:
            raise QuantumError("bandwidth must be positive")
        return cls("gaussian", pump_frequency=pump_frequency, bandwidth=bandwidth)

    @classmethod
    def sampled(cls, omega, psi, normalize: bool = False) -> "SpectralAmplitude":
        omega = np.asarray(omega, dtype=float)
        psi = np.asarray(psi, dtype=complex)
        if psi.shape != (omega.size, omega.size):
            raise QuantumError("psi must be sampled on the same mesh for both photons")
        if np.any(np.diff(omega) <= 0):
            raise QuantumError("frequency mesh must be increasing")
        if normalize:
            psi = psi / np.sqrt(_norm2(omega, psi))
        return cls("sampled", omega=omega, psi=psi)

    def g(self, tau):
        if self.kind != "gaussian":
            raise QuantumError("g(tau) is only implied for the Gaussian kind")
        return np.exp(-0.5 * (self.bandwidth * np.asarray(tau)) ** 2)

    def norm(self) -> float:
        if self.kind == "gaussian":
            return 1.0
        return _norm2(self.omega, self.psi)


def _norm2(omega, psi):
    return float(trapezoid(trapezoid(np.abs(psi) ** 2, omega, axis=1), omega))


def overlap_integral(psi: SpectralAmplitude) -> complex:
    """Exchange overlap of a normalized two-photon amplitude (1 = indistinguishable)."""
    if psi.kind == "gaussian":
        return 1.0 + 0j
    norm = psi.norm()
    if abs(norm - 1.0) > NORM_TOL:
        raise QuantumError(f"spectral amplitude not normalized (norm {norm:.12g})")
    integrand = psi.psi * np.conj(psi.psi.T)
    return complex(trapezoid(trapezoid(integrand, psi.omega, axis=1), psi.omega))


# --------------------------------------------------------------------------
# time domain
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class HOMTrace:
    delays: np.ndarray
    counts: np.ndarray

    def to_rows(self):
        return list(zip(self.delays.tolist(), self.counts.tolist()))


def coincidence_gaussian(T, bandwidth: float, delta_tau):
    """Integrated coincidences for a Gaussian g(tau) of width 1/bandwidth (not normalized)."""
    if bandwidth <= 0:
        raise QuantumError("bandwidth must be positive")
    d = np.asarray(delta_tau, dtype=float)
    return baseline(T) + 2 * np.real(interference_term(T)) * np.exp(-(bandwidth * d) ** 2)


def hom_trace_gaussian(T, bandwidth: float, delays) -> HOMTrace:
    """Baseline-normalized coincidences versus delay; wings tend to 1."""
    b = baseline(T)
    if b <= BASELINE_FLOOR:
        raise QuantumError("baseline vanishes; trace cannot be normalized")
    d = np.asarray(delays, dtype=float)
    return HOMTrace(d, coincidence_gaussian(T, bandwidth, d) / b)


def _sampled_g(tau, g, symmetry_tol):
    tau = np.asarray(tau, dtype=float)
    g = np.asarray(g, dtype=float)
    if tau.shape != g.shape or tau.ndim != 1:
        raise QuantumError("tau and g must be 1D arrays of equal length")
    if np.any(np.diff(tau) <= 0):
        raise QuantumError("tau grid must be increasing")
    mirrored = np.interp(-tau, tau, g, left=0.0, right=0.0)
    if np.max(np.abs(mirrored - g)) > symmetry_tol * np.max(np.abs(g)):
        raise QuantumError("g(tau) is not symmetric")
    return tau, g


def autocorrelation_ratio(tau, g, delta_tau, symmetry_tol: float = 1e-6):
    """int g(t) g(t - 2 delta_tau) dt / int g^2 dt by trapezoidal quadrature.

    g is taken as zero outside its grid; shifted samples come from linear
    interpolation.
    """
    tau, g = _sampled_g(tau, g, symmetry_tol)
    denom = trapezoid(g * g, tau)
    d = np.atleast_1d(np.asarray(delta_tau, dtype=float))
    out = np.empty(d.shape)
    for i, dt in enumerate(d):
        shifted = np.interp(tau - 2 * dt, tau, g, left=0.0, right=0.0)
        out[i] = trapezoid(g * shifted, tau) / denom
    return out if np.ndim(delta_tau) else float(out[0])


def coincidence_general(T, tau, g, delta_tau, symmetry_tol: float = 1e-6):
    """Integrated coincidences for a sampled real symmetric g(tau) (not normalized)."""
    ratio = autocorrelation_ratio(tau, g, delta_tau, symmetry_tol)
    return baseline(T) + 2 * np.real(interference_term(T)) * ratio


def joint_probability_time(T, g, tau, delta_tau):
    """Coincidence density at detector separation ``tau`` for delay ``delta_tau``.

    ``g`` is a callable (complex allowed). Integrating over tau and dividing by
    int |g|^2 recovers :func:`coincidence_general` for real symmetric g.
    """
    t1, t2, t3, t4 = _entries(T)
    tau = np.asarray(tau, dtype=float)
    g_direct = np.asarray(g(tau), dtype=complex)
    g_cross = np.asarray(g(2 * delta_tau - tau), dtype=complex)
    return (np.abs(t2 * t3) ** 2 * np.abs(g_cross) ** 2
            + np.abs(t1 * t4) ** 2 * np.abs(g_direct) ** 2
            + 2 * np.real(interference_term(T) * g_direct * np.conj(g_cross)))


def integrated_joint_probability(T, g, delta_tau, tau):
    """Trapezoidal integral of :func:`joint_probability_time` over ``tau``, divided by int |g|^2."""
    tau = np.asarray(tau, dtype=float)
    dens = joint_probability_time(T, g, tau, delta_tau)
    return trapezoid(dens, tau) / trapezoid(np.abs(np.asarray(g(tau))) ** 2, tau)
