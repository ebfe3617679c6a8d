"""Registries of constant-index test materials and an independent Airy formula."""

import numpy as np

from hompcm.geometry import Layer, LayerStack
from hompcm.materials import DispersionTable, MaterialRegistry


def constant_registry(tmp_path, media: dict) -> MaterialRegistry:
    reg = MaterialRegistry(tmp_path)
    for name, index in media.items():
        index = complex(index)
        reg.add(DispersionTable(name, [300.0, 3000.0], [index.real] * 2, [index.imag] * 2))
    return reg


def airy_te(n0, n1, n2, d_nm, wavelength_nm, angle_deg):
    """Single film, TE: textbook two-interface Airy sum, flux-normalized t."""
    beta = n0 * np.sin(np.radians(angle_deg))
    p0, p1, p2 = (np.sqrt(complex(n * n - beta * beta)) for n in (n0, n1, n2))
    p1 = p1 if p1.imag >= 0 else -p1
    r01, r12 = (p0 - p1) / (p0 + p1), (p1 - p2) / (p1 + p2)
    t01, t12 = 2 * p0 / (p0 + p1), 2 * p1 / (p1 + p2)
    ph = np.exp(1j * 2 * np.pi / wavelength_nm * p1 * d_nm)
    den = 1 + r01 * r12 * ph**2
    r = (r01 + r12 * ph**2) / den
    t = t01 * t12 * ph / den * np.sqrt(p2.real / p0.real)
    return r, t


def random_lossless_stack(rng, reg_media: dict, max_layers=5):
    n_layers = int(rng.integers(1, max_layers + 1))
    layers = []
    for i in range(n_layers):
        name = f"m{len(reg_media)}"
        reg_media[name] = float(rng.uniform(1.2, 3.5))
        layers.append(Layer(name, float(rng.uniform(10, 400))))
    return LayerStack("vacuum", tuple(layers), "vacuum")
