"""TE transfer-matrix solver for planar stacks and the stack -> NetworkMatrix map."""

from __future__ import annotations

import numpy as np

from . import kernels
from .geometry import Layer, LayerStack
from .materials import MaterialError, MaterialRegistry, default_registry
from .network import PORT_CONVENTION, NetworkMatrix

__all__ = ["Layer", "LayerStack", "tmm_coefficients", "tmm_spectrum",
           "network_matrix_from_stack", "network_spectrum"]


def _check_angle(angle_deg):
    if not 0.0 <= angle_deg < 90.0:
        raise ValueError(f"angle must lie in [0, 90) degrees, got {angle_deg}")


def _stack_eps(stack: LayerStack, wavelengths, registry):
    eps_in = registry.eps(stack.incidence_medium, wavelengths)
    eps_out = registry.eps(stack.exit_medium, wavelengths)
    for medium, eps in ((stack.incidence_medium, eps_in), (stack.exit_medium, eps_out)):
        if np.any(np.abs(eps.imag) > 0):
            raise MaterialError(f"port medium {medium!r} must be lossless")
    eps_layers = np.empty((len(stack.layers), wavelengths.size), dtype=complex)
    for i, l in enumerate(stack.layers):
        eps_layers[i] = registry.eps(l.material, wavelengths, l.kappa)
    d = np.array([l.thickness_nm for l in stack.layers], dtype=float)
    return eps_in, eps_layers, d, eps_out


def tmm_spectrum(stack: LayerStack, wavelengths_nm, angle_deg: float, side: str = "top",
                 registry: MaterialRegistry | None = None):
    """(r, t) arrays over many wavelengths; see :func:`tmm_coefficients`."""
    _check_angle(angle_deg)
    registry = registry or default_registry()
    w = np.atleast_1d(np.asarray(wavelengths_nm, dtype=float))
    eps_top = registry.eps(stack.incidence_medium, w).real
    # tangential wavevector fixed by the top-side port angle, whichever side is lit
    beta2 = eps_top * np.sin(np.radians(angle_deg)) ** 2
    if side == "bottom":
        stack = stack.reversed()
    elif side != "top":
        raise ValueError(f"side must be 'top' or 'bottom', got {side!r}")
    eps_in, eps_layers, d, eps_out = _stack_eps(stack, w, registry)
    return kernels.tmm_te(eps_in, eps_layers, d, eps_out, 2 * np.pi / w, beta2)


def tmm_coefficients(stack: LayerStack, wavelength_nm: float, angle_deg: float,
                     side: str = "top", registry: MaterialRegistry | None = None):
    """Field reflection and flux-normalized transmission for TE light.

    ``angle_deg`` is the port angle in the incidence (top) medium. For
    ``side="bottom"`` the stack is lit from below with the same tangential
    wavevector, so its reflection leaves along the top-lit transmitted beam.
    Reference planes are the outer interfaces of the stack.
    """
    r, t = tmm_spectrum(stack, [wavelength_nm], angle_deg, side, registry)
    return complex(r[0]), complex(t[0])


def network_spectrum(stack: LayerStack, wavelengths_nm, angle_deg: float,
                     registry: MaterialRegistry | None = None) -> np.ndarray:
    """Network matrices over a wavelength array, shape (nw, 2, 2)."""
    r_top, t_top = tmm_spectrum(stack, wavelengths_nm, angle_deg, "top", registry)
    r_bot, t_bot = tmm_spectrum(stack, wavelengths_nm, angle_deg, "bottom", registry)
    return np.stack([np.stack([t_top, r_bot], -1), np.stack([r_top, t_bot], -1)], -2)


def network_matrix_from_stack(stack: LayerStack, wavelength_nm: float, angle_deg: float = 45.0,
                              registry: MaterialRegistry | None = None) -> NetworkMatrix:
    m = network_spectrum(stack, [wavelength_nm], angle_deg, registry)[0]
    net = NetworkMatrix.from_array(m, float(wavelength_nm), float(angle_deg),
                                   solver="tmm", geometry=stack.name, ports=PORT_CONVENTION)
    return net.check_passive()
