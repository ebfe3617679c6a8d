"""Fourier modal method (RCWA) for TE light on 1D lamellar gratings.

Layers are coupled with Redheffer star products of interface and propagation
scattering matrices, so thin lossy strips and evanescent orders never build
growing exponentials. TE needs only the Laurent (Toeplitz) factorization of
eps(x).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz

from .geometry import Grating1D, LamellarLayer, Layer
from .kernels import kz_branch
from .materials import MaterialError, MaterialRegistry, default_registry
from .network import PORT_CONVENTION, NetworkMatrix

DEFAULT_HARMONICS = 41
_COND_LIMIT = 1e13


class SolverError(RuntimeError):
    """Eigen-decomposition or linear solve failed."""


class SingleModeError(ValueError):
    """Grating period lets diffraction orders other than the zeroth propagate."""


def floquet_max_period(wavelength_nm: float, angle_deg: float, n_ambient: float = 1.0) -> float:
    """Largest period keeping only the zeroth order propagating in the ambient."""
    if not 0.0 <= angle_deg <= 90.0:
        raise ValueError(f"angle must lie in [0, 90] degrees, got {angle_deg}")
    return wavelength_nm / (n_ambient * (1.0 + np.sin(np.radians(angle_deg))))


@dataclass(frozen=True)
class RCWAResult:
    """Zeroth-order coefficients plus every retained order.

    ``r_orders``/``t_orders`` are flux-normalized (|.|^2 is the power share
    of the incident zeroth order); evanescent orders carry zero.
    """

    r0: complex
    t0: complex
    orders: np.ndarray
    r_orders: np.ndarray
    t_orders: np.ndarray
    single_mode: bool

    def __iter__(self):
        yield self.r0
        yield self.t0
        yield {"orders": self.orders, "reflected": self.r_orders, "transmitted": self.t_orders}

    @property
    def reflected_power(self) -> float:
        return float(np.sum(np.abs(self.r_orders) ** 2))

    @property
    def transmitted_power(self) -> float:
        return float(np.sum(np.abs(self.t_orders) ** 2))

    @property
    def total_power(self) -> float:
        return self.reflected_power + self.transmitted_power


def _check_harmonics(n_harmonics: int):
    if n_harmonics < 3 or n_harmonics % 2 == 0:
        raise ValueError(f"n_harmonics must be odd and >= 3, got {n_harmonics}")


def lamellar_fourier(eps_a: complex, eps_b: complex, filling_ratio: float, n_max: int) -> np.ndarray:
    """Fourier coefficients eps_m, m = -n_max..n_max, of a centered strip of ``eps_a`` in ``eps_b``."""
    m = np.arange(-n_max, n_max + 1)
    coeffs = (eps_a - eps_b) * filling_ratio * np.sinc(m * filling_ratio)
    coeffs = coeffs.astype(complex)
    coeffs[n_max] += eps_b
    return coeffs


def _layer_modes(eps_fourier, kx):
    """Eigenvectors W and normal wavevectors gamma (Im >= 0) of a lamellar layer."""
    n = kx.size
    mat = toeplitz(eps_fourier[n - 1:], eps_fourier[n - 1::-1]) - np.diag(kx ** 2)
    try:
        vals, vecs = np.linalg.eig(mat)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"eigen-decomposition failed: {exc}") from None
    if not np.all(np.isfinite(vals)) or np.linalg.cond(vecs, 1) > _COND_LIMIT:
        raise SolverError("ill-conditioned layer eigenvectors")
    return vecs, kz_branch(vals)


def _interface(w1, v1, w2, v2):
    n = w1.shape[0]
    lhs = np.block([[-w1, w2], [v1, v2]])
    rhs = np.block([[w1, -w2], [v1, v2]])
    try:
        s = np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"singular interface matrix: {exc}") from None
    return s[:n, :n], s[:n, n:], s[n:, :n], s[n:, n:]


def _any_interface(w1, g1, w2, g2):
    if w1 is None and w2 is None:
        return _diag_interface(g1, g2)
    eye = np.eye(g1.size)
    w1 = eye if w1 is None else w1
    w2 = eye if w2 is None else w2
    return _interface(w1, w1 * g1, w2, w2 * g2)


def _star(a, b):
    """Redheffer product: ``a`` above ``b``."""
    a11, a12, a21, a22 = a
    b11, b12, b21, b22 = b
    eye = np.eye(a11.shape[0])
    f = np.linalg.solve(eye - b11 @ a22, b12)
    g = np.linalg.solve(eye - a22 @ b11, a21)
    return (a11 + a12 @ b11 @ g,
            a12 @ f,
            b21 @ g,
            b22 + b21 @ a22 @ f)


def _propagate(s, x):
    """Append a homogeneous slab whose modes pick up the diagonal phase ``x``."""
    s11, s12, s21, s22 = s
    return s11, s12 * x, x[:, None] * s21, x[:, None] * s22 * x


def _diag_interface(g1, g2):
    den = g1 + g2
    return (np.diag((g1 - g2) / den), np.diag(2 * g2 / den),
            np.diag(2 * g1 / den), np.diag((g2 - g1) / den))


def _kx(grating: Grating1D, wavelength_nm, angle_deg, n_in, n_harmonics):
    n_max = n_harmonics // 2
    m = np.arange(-n_max, n_max + 1)
    return m, n_in * np.sin(np.radians(angle_deg)) - m * wavelength_nm / grating.period_nm


def _port_eps(registry, medium, wavelength_nm):
    eps = complex(registry.eps(medium, wavelength_nm))
    if eps.imag != 0 or eps.real <= 0:
        raise MaterialError(f"port medium {medium!r} must be lossless")
    return eps


def _single_mode(m, kx, n_in, n_out):
    higher = m != 0
    return bool(np.all(np.abs(kx[higher]) > n_in) and np.all(np.abs(kx[higher]) > n_out))


def grating_smatrix(grating: Grating1D, wavelength_nm: float, angle_deg: float,
                    n_harmonics: int = DEFAULT_HARMONICS,
                    registry: MaterialRegistry | None = None,
                    modal_uniform: bool = False):
    """Full scattering matrix of the grating plus the order bookkeeping.

    Returns a :class:`_Scattering`; ``S = (S11, S12, S21, S22)`` maps
    top/bottom incident order amplitudes to reflected/transmitted ones, with
    reference planes on the outer interfaces. Lamellar layers that are
    actually uniform (f = 0 or 1) use plane-wave modes unless
    ``modal_uniform`` forces the Toeplitz eigen-solve.
    """
    _check_harmonics(n_harmonics)
    if not 0.0 <= angle_deg < 90.0:
        raise ValueError(f"angle must lie in [0, 90) degrees, got {angle_deg}")
    registry = registry or default_registry()
    eps_in = _port_eps(registry, grating.incidence_medium, wavelength_nm)
    eps_out = _port_eps(registry, grating.exit_medium, wavelength_nm)
    n_in = np.sqrt(eps_in.real)
    m, kx = _kx(grating, wavelength_nm, angle_deg, n_in, n_harmonics)
    n = kx.size
    k0 = 2 * np.pi / wavelength_nm

    g_in = kz_branch(eps_in - kx ** 2)
    g_out = kz_branch(eps_out - kx ** 2)
    # modes of the medium above the current interface; w None means plane waves
    w_prev, g_prev = None, g_in
    total = None
    for layer in grating.layers:
        if layer.thickness_nm == 0:
            continue
        w = None
        if isinstance(layer, LamellarLayer):
            ea = complex(registry.eps(layer.material_a, wavelength_nm, layer.kappa))
            eb = complex(registry.eps(layer.material_b, wavelength_nm, layer.kappa))
            if not modal_uniform and (layer.filling_ratio in (0.0, 1.0) or ea == eb):
                eps_h = ea if layer.filling_ratio == 1.0 else eb
                gamma = kz_branch(eps_h - kx ** 2)
            else:
                w, gamma = _layer_modes(lamellar_fourier(ea, eb, layer.filling_ratio, n - 1), kx)
        elif isinstance(layer, Layer):
            eps_h = complex(registry.eps(layer.material, wavelength_nm, layer.kappa))
            gamma = kz_branch(eps_h - kx ** 2)
        else:
            raise TypeError(f"unsupported layer {layer!r}")
        s_int = _any_interface(w_prev, g_prev, w, gamma)
        total = s_int if total is None else _star(total, s_int)
        total = _propagate(total, np.exp(1j * k0 * gamma * layer.thickness_nm))
        w_prev, g_prev = w, gamma
    s_int = _any_interface(w_prev, g_prev, None, g_out)
    total = s_int if total is None else _star(total, s_int)
    return _Scattering(total, m, kx, g_in, g_out, float(n_in), float(np.sqrt(eps_out.real)))


@dataclass(frozen=True)
class _Scattering:
    s: tuple
    m: np.ndarray
    kx: np.ndarray
    gamma_in: np.ndarray
    gamma_out: np.ndarray
    n_in: float
    n_out: float

    @property
    def i0(self) -> int:
        return int(np.flatnonzero(self.m == 0)[0])

    @property
    def single_mode(self) -> bool:
        return _single_mode(self.m, self.kx, self.n_in, self.n_out)


def _flux(amps, gamma_to, gamma_from0):
    re = np.where(gamma_to.real > 0, gamma_to.real, 0.0)
    return amps * np.sqrt(re / gamma_from0.real)


def rcwa_coefficients(grating: Grating1D, wavelength_nm: float, angle_deg: float,
                      n_harmonics: int = DEFAULT_HARMONICS, side: str = "top",
                      registry: MaterialRegistry | None = None,
                      modal_uniform: bool = False) -> RCWAResult:
    """Diffraction amplitudes for TE light on a lamellar grating.

    ``side="bottom"`` lights the grating from the exit medium with the same
    tangential wavevector as the top-side port, so the two sides share one
    scattering matrix. ``single_mode`` flags whether any higher order
    propagates in either port medium.
    """
    if side not in ("top", "bottom"):
        raise ValueError(f"side must be 'top' or 'bottom', got {side!r}")
    sc = grating_smatrix(grating, wavelength_nm, angle_deg, n_harmonics, registry, modal_uniform)
    s11, s12, s21, s22 = sc.s
    i0, g_in, g_out = sc.i0, sc.gamma_in, sc.gamma_out
    if side == "top":
        r = _flux(s11[:, i0], g_in, g_in[i0])
        t = _flux(s21[:, i0], g_out, g_in[i0])
    else:
        r = _flux(s22[:, i0], g_out, g_out[i0])
        t = _flux(s12[:, i0], g_in, g_out[i0])
    return RCWAResult(complex(r[i0]), complex(t[i0]), sc.m, r, t, sc.single_mode)


def network_matrix_from_grating(grating: Grating1D, wavelength_nm: float, angle_deg: float = 45.0,
                                n_harmonics: int = DEFAULT_HARMONICS,
                                registry: MaterialRegistry | None = None) -> NetworkMatrix:
    """Zeroth-order 2x2 network of a grating; refuses geometries with propagating higher orders."""
    sc = grating_smatrix(grating, wavelength_nm, angle_deg, n_harmonics, registry)
    if not sc.single_mode:
        limit = floquet_max_period(wavelength_nm, angle_deg, max(sc.n_in, sc.n_out))
        raise SingleModeError(
            f"single-mode violation: period {grating.period_nm} nm lets higher orders propagate "
            f"(limit {limit:.1f} nm at {wavelength_nm} nm, {angle_deg} deg)")
    s11, s12, s21, s22 = sc.s
    i0, g_in, g_out = sc.i0, sc.gamma_in, sc.gamma_out
    t1 = _flux(s21[i0, i0], g_out[i0], g_in[i0])
    t4 = _flux(s12[i0, i0], g_in[i0], g_out[i0])
    net = NetworkMatrix(t1, s22[i0, i0], s11[i0, i0], t4, float(wavelength_nm), float(angle_deg),
                        {"solver": "rcwa", "geometry": grating.name, "n_harmonics": n_harmonics,
                         "ports": PORT_CONVENTION})
    return net.check_passive()
