"""Layered and lamellar geometry descriptions, JSON files and the two device presets.

Layers are listed top (incidence side) to bottom (exit side).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

from .materials import PHASE_CHANGE


class GeometryError(ValueError):
    pass


def _check_kappa(kappa):
    if kappa is not None and not 0.0 <= kappa <= 1.0:
        raise GeometryError(f"crystallinity must lie in [0, 1], got {kappa}")


@dataclass(frozen=True)
class Layer:
    material: str
    thickness_nm: float
    kappa: float | None = None

    def __post_init__(self):
        # zero thickness is accepted and acts as an absent layer
        if not self.thickness_nm >= 0:
            raise GeometryError(f"layer thickness must be >= 0, got {self.thickness_nm}")
        _check_kappa(self.kappa)


@dataclass(frozen=True)
class LamellarLayer:
    """One grating layer: ``material_a`` fills ``filling_ratio`` of each period, centered."""

    material_a: str
    material_b: str
    filling_ratio: float
    thickness_nm: float
    kappa: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.filling_ratio <= 1.0:
            raise GeometryError(f"filling ratio must lie in [0, 1], got {self.filling_ratio}")
        if not self.thickness_nm >= 0:
            raise GeometryError(f"layer thickness must be >= 0, got {self.thickness_nm}")
        _check_kappa(self.kappa)


@dataclass(frozen=True)
class LayerStack:
    incidence_medium: str = "vacuum"
    layers: tuple = ()
    exit_medium: str = "vacuum"
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))

    def reversed(self) -> "LayerStack":
        return LayerStack(self.exit_medium, self.layers[::-1], self.incidence_medium, self.name)

    def with_kappa(self, kappa: float, index: int | None = None) -> "LayerStack":
        return replace(self, layers=_set_kappa(self.layers, kappa, index))

    def with_thickness(self, index: int, thickness_nm: float) -> "LayerStack":
        layers = list(self.layers)
        layers[index] = replace(layers[index], thickness_nm=thickness_nm)
        return replace(self, layers=tuple(layers))


@dataclass(frozen=True)
class Grating1D:
    period_nm: float
    layers: tuple = ()
    incidence_medium: str = "vacuum"
    exit_medium: str = "vacuum"
    name: str = "custom"

    def __post_init__(self):
        if not self.period_nm > 0:
            raise GeometryError(f"period must be positive, got {self.period_nm}")
        object.__setattr__(self, "layers", tuple(self.layers))

    def reversed(self) -> "Grating1D":
        return Grating1D(self.period_nm, self.layers[::-1], self.exit_medium,
                         self.incidence_medium, self.name)

    def with_kappa(self, kappa: float, index: int | None = None) -> "Grating1D":
        return replace(self, layers=_set_kappa(self.layers, kappa, index))

    def with_thickness(self, index: int, thickness_nm: float) -> "Grating1D":
        layers = list(self.layers)
        layers[index] = replace(layers[index], thickness_nm=thickness_nm)
        return replace(self, layers=tuple(layers))

    def with_filling_ratio(self, f: float) -> "Grating1D":
        layers = tuple(replace(l, filling_ratio=f) if isinstance(l, LamellarLayer) else l
                       for l in self.layers)
        return replace(self, layers=layers)

    def with_period(self, period_nm: float) -> "Grating1D":
        return replace(self, period_nm=period_nm)


def _uses_pcm(layer) -> bool:
    if isinstance(layer, LamellarLayer):
        return layer.material_a in PHASE_CHANGE or layer.material_b in PHASE_CHANGE
    return layer.material in PHASE_CHANGE


def _set_kappa(layers, kappa, index):
    out = []
    for i, layer in enumerate(layers):
        if _uses_pcm(layer) and (index is None or index == i):
            layer = replace(layer, kappa=kappa)
        out.append(layer)
    if index is not None and not _uses_pcm(layers[index]):
        raise GeometryError(f"layer {index} holds no phase-change material")
    return tuple(out)


def pcm_layer_indices(geometry) -> list[int]:
    return [i for i, l in enumerate(geometry.layers) if _uses_pcm(l)]


# --------------------------------------------------------------------------
# presets
# --------------------------------------------------------------------------

STRUCTURE_A_PERIOD_NM = 450.0
STRUCTURE_A_FILLING = 285.0 / 450.0
STRUCTURE_B_LOWER_TIO2 = 2  # layer index of the lower TiO2 film


def structure_a(kappa: float = 1.0, filling_ratio: float = STRUCTURE_A_FILLING,
                period_nm: float = STRUCTURE_A_PERIOD_NM,
                substrate_half_space: bool = False) -> Grating1D:
    """GeTe/Au strips (15 nm) on 190 nm SiO2, vacuum on both sides.

    ``substrate_half_space`` replaces the finite silica film by a semi-infinite
    silica exit medium.
    """
    strips = LamellarLayer("GeTe", "Au", filling_ratio, 15.0, kappa)
    if substrate_half_space:
        return Grating1D(period_nm, (strips,), "vacuum", "SiO2", "structure-A-substrate")
    return Grating1D(period_nm, (strips, Layer("SiO2", 190.0)), "vacuum", "vacuum", "structure-A")


def structure_b(kappa: float = 1.0, lower_tio2_nm: float = 330.0,
                exit_medium: str = "vacuum") -> LayerStack:
    """TiO2/GeTe/TiO2/GeTe/SiO2 on a 15 nm TiN heater, vacuum above and below."""
    layers = (
        Layer("TiO2", 290.0),
        Layer("GeTe", 13.0, kappa),
        Layer("TiO2", lower_tio2_nm),
        Layer("GeTe", 21.0, kappa),
        Layer("SiO2", 290.0),
        Layer("TiN", 15.0),
    )
    return LayerStack("vacuum", layers, exit_medium, "structure-B")


PRESETS = {"structure-A": structure_a, "structure-B": structure_b}


def preset(name: str, **kwargs):
    try:
        return PRESETS[name](**kwargs)
    except KeyError:
        raise GeometryError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


# --------------------------------------------------------------------------
# JSON files
# --------------------------------------------------------------------------

def _layer_from_dict(d: dict, default_f=None):
    try:
        if "material_a" in d:
            f = d.get("filling_ratio", default_f)
            if f is None:
                raise GeometryError("lamellar layer needs a filling_ratio")
            return LamellarLayer(d["material_a"], d["material_b"], float(f),
                                 float(d["thickness_nm"]), d.get("kappa"))
        return Layer(d["material"], float(d["thickness_nm"]), d.get("kappa"))
    except KeyError as exc:
        raise GeometryError(f"layer record missing field {exc}") from None


def _layer_to_dict(layer) -> dict:
    if isinstance(layer, LamellarLayer):
        d = {"material_a": layer.material_a, "material_b": layer.material_b,
             "filling_ratio": layer.filling_ratio, "thickness_nm": layer.thickness_nm}
    else:
        d = {"material": layer.material, "thickness_nm": layer.thickness_nm}
    if layer.kappa is not None:
        d["kappa"] = layer.kappa
    return d


def geometry_from_dict(data: dict):
    """A dict with ``period_nm`` becomes a Grating1D, anything else a LayerStack."""
    if isinstance(data, list):
        data = {"layers": data}
    inc = data.get("incidence_medium", "vacuum")
    exit_ = data.get("exit_medium", "vacuum")
    name = data.get("name", "custom")
    layers = tuple(_layer_from_dict(d, data.get("filling_ratio")) for d in data.get("layers", []))
    if "period_nm" in data:
        return Grating1D(float(data["period_nm"]), layers, inc, exit_, name)
    if any(isinstance(l, LamellarLayer) for l in layers):
        raise GeometryError("lamellar layers need a period_nm")
    return LayerStack(inc, layers, exit_, name)


def geometry_to_dict(geometry) -> dict:
    d = {"name": geometry.name, "incidence_medium": geometry.incidence_medium,
         "exit_medium": geometry.exit_medium,
         "layers": [_layer_to_dict(l) for l in geometry.layers]}
    if isinstance(geometry, Grating1D):
        d["period_nm"] = geometry.period_nm
    return d


def load_geometry(path):
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise GeometryError(f"{path}: {exc}") from None
    return geometry_from_dict(data)


def save_geometry(geometry, path):
    Path(path).write_text(json.dumps(geometry_to_dict(geometry), indent=2) + "\n")
