"""Transient 1D joule heating across a layered stack.

Finite-volume discretization in depth with harmonic-mean face conductances,
backward Euler in time. Depth is measured downward from the top surface.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from . import kernels
from .materials import data_dir

AMBIENT_K = 293.15


class ThermalError(ValueError):
    pass


@dataclass(frozen=True)
class ThermalLayer:
    material: str
    thickness_nm: float
    conductivity: float
    heat_capacity: float
    is_heater: bool = False

    def __post_init__(self):
        for name in ("thickness_nm", "conductivity", "heat_capacity"):
            if not getattr(self, name) > 0:
                raise ThermalError(f"{self.material}: {name} must be positive")


@dataclass(frozen=True)
class CurrentPulse:
    """Piecewise-linear areal heater power (W/m^2) through ``(time_s, power)`` samples."""

    time_s: np.ndarray
    power: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.time_s, dtype=float)
        p = np.asarray(self.power, dtype=float)
        if t.ndim != 1 or t.shape != p.shape or t.size < 2:
            raise ThermalError("pulse needs at least two (time, power) samples")
        if np.any(np.diff(t) <= 0):
            raise ThermalError("pulse times must increase")
        if np.any(p < 0):
            raise ThermalError("pulse power must be non-negative")
        object.__setattr__(self, "time_s", t)
        object.__setattr__(self, "power", p)

    @classmethod
    def from_current(cls, time_s, current_a, sheet_resistance: float, width_m: float):
        """Heater of sheet resistance R_s (ohm/sq) and width w carrying current I: P/A = I^2 R_s / w^2."""
        i = np.asarray(current_a, dtype=float)
        return cls(time_s, i * i * sheet_resistance / width_m ** 2)

    @classmethod
    def boxcar(cls, power: float, start: float, stop: float, ramp: float = 0.0):
        if ramp > 0:
            return cls([start, start + ramp, stop - ramp, stop], [0.0, power, power, 0.0])
        eps = 1e-6 * (stop - start)
        return cls([start, start + eps, stop - eps, stop], [0.0, power, power, 0.0])

    @property
    def end(self) -> float:
        nz = np.flatnonzero(self.power > 0)
        return float(self.time_s[min(nz[-1] + 1, self.time_s.size - 1)]) if nz.size else float(self.time_s[0])

    def __call__(self, t):
        return np.interp(t, self.time_s, self.power, left=0.0, right=0.0)

    def energy(self, t) -> np.ndarray:
        """Exact integral of the pulse from -inf to ``t`` (J/m^2)."""
        t = np.asarray(t, dtype=float)
        ts, ps = self.time_s, self.power
        seg = np.diff(ts)
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (ps[1:] + ps[:-1]) * seg)])
        tc = np.clip(t, ts[0], ts[-1])
        i = np.clip(np.searchsorted(ts, tc, side="right") - 1, 0, ts.size - 2)
        x = tc - ts[i]
        slope = (ps[i + 1] - ps[i]) / seg[i]
        return cum[i] + ps[i] * x + 0.5 * slope * x * x

    def step_average(self, t_edges) -> np.ndarray:
        e = self.energy(t_edges)
        return np.diff(e) / np.diff(t_edges)


@dataclass(frozen=True)
class GridSpec:
    max_cell_nm: float = 5.0
    min_cells_per_layer: int = 4
    dt_s: float = 1e-9

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.max_cell_nm / factor, self.min_cells_per_layer * factor, self.dt_s / factor)


@dataclass
class TemperatureField:
    depth_nm: np.ndarray
    time_s: np.ndarray
    temperature: np.ndarray
    layer_bounds: list = field(default_factory=list)
    cell_width_nm: np.ndarray | None = None
    cell_heat_capacity: np.ndarray | None = None

    def layer_slice(self, index: int) -> np.ndarray:
        _, top, bottom = self.layer_bounds[index]
        return (self.depth_nm > top) & (self.depth_nm < bottom)

    def layer_temperature(self, index: int) -> np.ndarray:
        """Mean temperature of one layer versus time."""
        sel = self.layer_slice(index)
        w = self.cell_width_nm[sel]
        return self.temperature[:, sel] @ w / w.sum()

    def to_csv(self, path):
        """Matrix CSV: first row depths, then one row per time with the time in column 0."""
        buf = io.StringIO()
        buf.write("time_s\\depth_nm," + ",".join(f"{z:.12g}" for z in self.depth_nm) + "\n")
        for t, row in zip(self.time_s, self.temperature):
            buf.write(f"{t:.12g}," + ",".join(f"{v:.12g}" for v in row) + "\n")
        Path(path).write_text(buf.getvalue())


def _build_grid(stack, grid: GridSpec):
    widths, cond, cap, heater, bounds = [], [], [], [], []
    top = 0.0
    for layer in stack:
        n = max(grid.min_cells_per_layer, int(np.ceil(layer.thickness_nm / grid.max_cell_nm)))
        w = layer.thickness_nm / n
        widths += [w] * n
        cond += [layer.conductivity] * n
        cap += [layer.heat_capacity] * n
        heater += [layer.is_heater] * n
        bounds.append((layer.material, top, top + layer.thickness_nm))
        top += layer.thickness_nm
    widths = np.array(widths)
    centers = np.cumsum(widths) - 0.5 * widths
    return widths, np.array(cond), np.array(cap), np.array(heater), centers, bounds


def _check_heater(stack):
    flags = np.array([l.is_heater for l in stack])
    idx = np.flatnonzero(flags)
    if idx.size == 0:
        raise ThermalError("stack has no heater layer")
    if np.any(np.diff(idx) != 1):
        raise ThermalError("heater layers must be contiguous")


def solve_heat_1d(stack, pulse: CurrentPulse, duration: float, boundary=("insulated", "fixed"),
                  grid: GridSpec = GridSpec(), ambient: float = AMBIENT_K) -> TemperatureField:
    """March rho c dT/dt = d/dz(k dT/dz) + q with q confined to the heater.

    ``boundary`` gives the (top, bottom) condition, each ``"insulated"`` or
    ``"fixed"`` (held at ``ambient``). The heater deposits the pulse's areal
    power uniformly over its thickness.
    """
    stack = list(stack)
    if not stack:
        raise ThermalError("empty stack")
    _check_heater(stack)
    if duration <= 0 or grid.dt_s <= 0 or grid.max_cell_nm <= 0 or grid.min_cells_per_layer < 1:
        raise ThermalError("degenerate grid or duration")
    for side in boundary:
        if side not in ("insulated", "fixed"):
            raise ThermalError(f"unknown boundary {side!r}")

    widths_nm, k, rho_c, heater, centers, bounds = _build_grid(stack, grid)
    dz = widths_nm * 1e-9
    faces = np.empty(k.size + 1)
    # series resistance of the two half cells on either side of each face
    faces[1:-1] = 1.0 / (0.5 * dz[:-1] / k[:-1] + 0.5 * dz[1:] / k[1:])
    faces[0] = k[0] / (0.5 * dz[0]) if boundary[0] == "fixed" else 0.0
    faces[-1] = k[-1] / (0.5 * dz[-1]) if boundary[1] == "fixed" else 0.0
    weights = np.where(heater, dz, 0.0)
    weights /= weights.sum()

    n_steps = int(np.ceil(duration / grid.dt_s - 1e-9))
    t_edges = np.linspace(0.0, duration, n_steps + 1)
    power = pulse.step_average(t_edges)
    # march the rise above ambient: a zero source then stays exactly zero
    rise = kernels.heat_implicit(rho_c * dz, faces, weights, power, np.diff(t_edges),
                                 np.zeros(k.size), 0.0)
    return TemperatureField(centers, t_edges, rise + float(ambient), bounds, widths_nm, rho_c)


def probe(field: TemperatureField, depth_nm: float, time_s: float) -> float:
    """Bilinear interpolation of the stored field."""
    interp = RegularGridInterpolator((field.time_s, field.depth_nm), field.temperature)
    try:
        return float(interp([[time_s, depth_nm]])[0])
    except ValueError:
        raise ThermalError(f"probe ({depth_nm} nm, {time_s} s) outside the stored grid") from None


def internal_energy(field: TemperatureField) -> np.ndarray:
    """Heat stored above the initial state per unit area (J/m^2) at every time."""
    return (field.temperature - field.temperature[0]) @ (field.cell_heat_capacity * field.cell_width_nm * 1e-9)


# --------------------------------------------------------------------------
# file formats and the structure-B preset
# --------------------------------------------------------------------------

def _csv_rows(path):
    lines = [l for l in Path(path).read_text().splitlines() if l.strip() and not l.startswith("#")]
    return list(csv.DictReader(lines))


def load_thermal_constants(path=None) -> dict:
    path = Path(path) if path else data_dir() / "thermal_constants.csv"
    return {r["material"]: (float(r["k_W_mK"]), float(r["rho_c_J_m3K"])) for r in _csv_rows(path)}


def load_thermal_stack(path) -> list[ThermalLayer]:
    """Rows ``material,thickness_nm,k_W_mK,rho_c_J_m3K,is_heater``, top layer first."""
    out = []
    for lineno, r in enumerate(_csv_rows(path), start=2):
        try:
            out.append(ThermalLayer(r["material"], float(r["thickness_nm"]), float(r["k_W_mK"]),
                                    float(r["rho_c_J_m3K"]),
                                    r["is_heater"].strip().lower() in ("1", "true", "yes")))
        except (KeyError, ValueError, AttributeError) as exc:
            raise ThermalError(f"{path}: row {lineno}: {exc}") from None
    return out


def save_thermal_stack(stack, path):
    rows = ["material,thickness_nm,k_W_mK,rho_c_J_m3K,is_heater"]
    rows += [f"{l.material},{l.thickness_nm:.12g},{l.conductivity:.12g},{l.heat_capacity:.12g},"
             f"{int(l.is_heater)}" for l in stack]
    Path(path).write_text("\n".join(rows) + "\n")


def load_pulse(path) -> CurrentPulse:
    rows = _csv_rows(path)
    return CurrentPulse([float(r["time_s"]) for r in rows], [float(r["power_W_m2"]) for r in rows])


def save_pulse(pulse: CurrentPulse, path):
    rows = ["time_s,power_W_m2"] + [f"{t:.12g},{p:.12g}" for t, p in zip(pulse.time_s, pulse.power)]
    Path(path).write_text("\n".join(rows) + "\n")


def structure_b_thermal(substrate_nm: float = 2000.0, constants: dict | None = None) -> list[ThermalLayer]:
    """Structure B above its TiN heater, on ``substrate_nm`` of fused silica."""
    c = constants or load_thermal_constants()
    spec = [("TiO2", 290.0, False), ("GeTe", 13.0, False), ("TiO2", 330.0, False),
            ("GeTe", 21.0, False), ("SiO2", 290.0, False), ("TiN", 15.0, True),
            ("SiO2", substrate_nm, False)]
    return [ThermalLayer(m, d, *c[m], heater) for m, d, heater in spec]


def preset_pulse() -> CurrentPulse:
    """The shipped 500 ns pulse; its amplitude is a calibration, see the file header."""
    return load_pulse(data_dir() / "pulse_structure_b.csv")
