"""Parameter sweeps, switching contrast and baseline-constrained contrast optimization."""

from __future__ import annotations

import hashlib
import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar

from . import geometry as geo
from .materials import CONSTANT_INDEX, PHASE_CHANGE, MaterialRegistry, default_registry
from .quantum import baseline, coalescence
from .rcwa import DEFAULT_HARMONICS, SingleModeError, network_matrix_from_grating
from .tmm import network_spectrum

SWEEP_PARAMETERS = ("wavelength_nm", "filling_ratio", "layer_thickness", "crystallinity",
                    "angle_deg", "period_nm")
DEFAULT_BASELINE_MIN = {"structure-A": 1.0 / 12.0, "structure-B": 1.0 / 16.0}


class DesignError(ValueError):
    pass


def _param_key(name: str):
    base, _, idx = name.partition(":")
    if base not in SWEEP_PARAMETERS:
        raise DesignError(f"unknown parameter {name!r}; choose from {SWEEP_PARAMETERS}")
    if base == "layer_thickness" and not idx:
        raise DesignError("layer_thickness needs a layer index, e.g. layer_thickness:2")
    return base, (int(idx) if idx else None)


def resolve_geometry(geometry):
    """Preset name, JSON path or geometry object -> geometry object."""
    if isinstance(geometry, (geo.LayerStack, geo.Grating1D)):
        return geometry
    if geometry in geo.PRESETS:
        return geo.preset(geometry)
    path = Path(geometry)
    if path.exists():
        return geo.load_geometry(path)
    raise DesignError(f"cannot resolve geometry {geometry!r}")


def apply_parameters(geometry, params: dict):
    """Return (geometry, wavelength_nm, angle_deg) with sweep parameters applied."""
    wavelength, angle = 810.0, 45.0
    for name, value in params.items():
        base, idx = _param_key(name)
        if base == "wavelength_nm":
            wavelength = float(value)
        elif base == "angle_deg":
            angle = float(value)
        elif base == "crystallinity":
            geometry = geometry.with_kappa(float(value), idx)
        elif base == "layer_thickness":
            geometry = geometry.with_thickness(idx, float(value))
        elif base == "filling_ratio":
            if not isinstance(geometry, geo.Grating1D):
                raise DesignError("filling_ratio only applies to gratings")
            geometry = geometry.with_filling_ratio(float(value))
        elif base == "period_nm":
            if not isinstance(geometry, geo.Grating1D):
                raise DesignError("period_nm only applies to gratings")
            geometry = geometry.with_period(float(value))
    return geometry, wavelength, angle


def network_array(geometry, params: dict, n_harmonics: int = DEFAULT_HARMONICS,
                  registry: MaterialRegistry | None = None) -> np.ndarray:
    """2x2 complex network for one parameter set."""
    g, wl, angle = apply_parameters(geometry, params)
    if isinstance(g, geo.Grating1D):
        return network_matrix_from_grating(g, wl, angle, n_harmonics, registry).as_array()
    return network_spectrum(g, [wl], angle, registry)[0]


# --------------------------------------------------------------------------
# sweeps
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    steps: int

    def __post_init__(self):
        _param_key(self.name)
        if self.steps < 2:
            raise DesignError(f"axis {self.name}: need at least 2 steps")
        if not self.start < self.stop:
            raise DesignError(f"axis {self.name}: min must be below max")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class SweepSpec:
    geometry: str
    axis1: Axis
    axis2: Axis
    fixed: dict = field(default_factory=dict)
    n_harmonics: int = DEFAULT_HARMONICS

    def to_dict(self) -> dict:
        return {"geometry": str(self.geometry), "axis1": asdict(self.axis1),
                "axis2": asdict(self.axis2), "fixed": dict(self.fixed),
                "n_harmonics": self.n_harmonics}


@dataclass
class SweepResult:
    spec: SweepSpec
    axis1: np.ndarray
    axis2: np.ndarray
    coalescence: np.ndarray
    baseline: np.ndarray
    networks: np.ndarray
    valid: np.ndarray
    material_hashes: dict = field(default_factory=dict)

    def rows(self):
        for i, a in enumerate(self.axis1):
            for j, b in enumerate(self.axis2):
                yield a, b, self.coalescence[i, j], self.baseline[i, j], self.networks[i, j], self.valid[i, j]

    def csv_text(self) -> str:
        header = ["axis1", "axis2", "coalescence", "baseline"]
        for name in ("t1", "t2", "t3", "t4"):
            header += [f"re_{name}", f"im_{name}"]
        header.append("valid")
        lines = [",".join(header)]
        for a, b, c, base, net, ok in self.rows():
            vals = [a, b, c, base]
            for z in net.reshape(-1):
                vals += [z.real, z.imag]
            lines.append(",".join(f"{v:.12g}" for v in vals) + f",{int(ok)}")
        return "\n".join(lines) + "\n"

    def to_csv(self, path):
        Path(path).write_text(self.csv_text())

    def metadata(self) -> dict:
        return {"spec": self.spec.to_dict(),
                "axis1_name": self.spec.axis1.name, "axis2_name": self.spec.axis2.name,
                "shape": [len(self.axis1), len(self.axis2)],
                "invalid_cells": int((~self.valid).sum()),
                "material_hashes": self.material_hashes}

    def write(self, path):
        """CSV grid plus a ``.json`` metadata sidecar next to it."""
        path = Path(path)
        self.to_csv(path)
        path.with_suffix(".json").write_text(json.dumps(self.metadata(), indent=2, sort_keys=True) + "\n")


def _row(args):
    """One axis1 row of a sweep; module-level so worker processes can import it."""
    geometry, axis1_name, a, axis2_name, axis2_vals, fixed, n_harmonics = args
    registry = default_registry()
    n2 = len(axis2_vals)
    nets = np.full((n2, 2, 2), np.nan + 0j)
    valid = np.zeros(n2, dtype=bool)
    params = dict(fixed)
    params[axis1_name] = a
    if axis2_name == "wavelength_nm" and isinstance(geometry, geo.LayerStack):
        g, _, angle = apply_parameters(geometry, params)
        nets[:] = network_spectrum(g, axis2_vals, angle, registry)
        valid[:] = True
        return nets, valid
    for j, b in enumerate(axis2_vals):
        params[axis2_name] = b
        try:
            nets[j] = network_array(geometry, params, n_harmonics, registry)
            valid[j] = True
        except SingleModeError:
            pass
    return nets, valid


def run_sweep(spec: SweepSpec, jobs: int = 1) -> SweepResult:
    """Evaluate the network on the axis1 x axis2 grid.

    Cells violating the single-mode condition are kept as NaN with
    ``valid == False``. Rows are independent, so any ``jobs`` gives identical
    numbers.
    """
    geometry = resolve_geometry(spec.geometry)
    a1, a2 = spec.axis1.values, spec.axis2.values
    tasks = [(geometry, spec.axis1.name, a, spec.axis2.name, a2, dict(spec.fixed), spec.n_harmonics)
             for a in a1]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_row, tasks))
    else:
        rows = [_row(t) for t in tasks]
    nets = np.stack([r[0] for r in rows])
    valid = np.stack([r[1] for r in rows])
    base = np.full(valid.shape, np.nan)
    coal = np.full(valid.shape, np.nan)
    base[valid] = baseline(nets[valid])
    coal[valid] = coalescence(nets[valid])
    return SweepResult(spec, a1, a2, coal, base, nets, valid, material_hashes(geometry))


def material_hashes(geometry, registry: MaterialRegistry | None = None) -> dict:
    """sha256 of every optical-constant file the geometry depends on."""
    registry = registry or default_registry()
    names = {geometry.incidence_medium, geometry.exit_medium}
    for l in geometry.layers:
        if isinstance(l, geo.LamellarLayer):
            names |= {l.material_a, l.material_b}
        else:
            names.add(l.material)
    for name in sorted(names):
        for table_id in PHASE_CHANGE.get(name, (name,)):
            if table_id not in CONSTANT_INDEX:
                registry.table(table_id)
    return registry.file_hashes()


# --------------------------------------------------------------------------
# switching contrast and optimization
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Switching:
    coal_crystalline: float
    coal_amorphous: float
    baseline_crystalline: float
    baseline_amorphous: float

    @property
    def contrast(self) -> float:
        return self.coal_amorphous - self.coal_crystalline

    @property
    def min_baseline(self) -> float:
        return min(self.baseline_crystalline, self.baseline_amorphous)

    def __iter__(self):
        yield self.coal_crystalline
        yield self.coal_amorphous
        yield self.contrast


def switching_contrast(geometry, params: dict | None = None, n_harmonics: int = DEFAULT_HARMONICS,
                       registry: MaterialRegistry | None = None) -> Switching:
    """Coalescence with every phase-change layer fully crystalline and fully amorphous.

    Unpacks as ``(coal_crystalline, coal_amorphous, contrast)``.
    """
    geometry = resolve_geometry(geometry)
    params = {k: v for k, v in (params or {}).items() if not k.startswith("crystallinity")}
    if not geo.pcm_layer_indices(geometry):
        net = network_array(geometry, params, n_harmonics, registry)
        c, b = float(coalescence(net)), float(baseline(net))
        return Switching(c, c, b, b)
    out = []
    for kappa in (1.0, 0.0):
        net = network_array(geometry, {**params, "crystallinity": kappa}, n_harmonics, registry)
        out.append((float(coalescence(net)), float(baseline(net))))
    (cc, bc), (ca, ba) = out
    return Switching(cc, ca, bc, ba)


@dataclass(frozen=True)
class OptimizeResult:
    params: dict
    contrast: float
    switching: Switching
    baseline_min: float
    constraint_active: bool
    evaluations: int
    notes: str = "baseline bound enforced in both phases"

    def to_dict(self) -> dict:
        s = self.switching
        return {"params": self.params, "contrast": self.contrast,
                "coal_crystalline": s.coal_crystalline, "coal_amorphous": s.coal_amorphous,
                "baseline_crystalline": s.baseline_crystalline,
                "baseline_amorphous": s.baseline_amorphous, "baseline_min": self.baseline_min,
                "constraint_active": self.constraint_active, "evaluations": self.evaluations,
                "notes": self.notes}


def optimize_contrast(geometry, free: dict, baseline_min: float | None = None,
                      fixed: dict | None = None, grid_points: int = 21, refine: bool = True,
                      n_harmonics: int = DEFAULT_HARMONICS,
                      registry: MaterialRegistry | None = None) -> OptimizeResult:
    """Maximize amorphous-minus-crystalline coalescence subject to a baseline floor.

    ``free`` maps parameter names to ``(low, high)`` bounds. A Cartesian grid
    scan is followed by bounded golden-section refinement of one parameter at
    a time around the best feasible grid point. Fully deterministic.
    """
    name = geometry if isinstance(geometry, str) else getattr(geometry, "name", "custom")
    geometry = resolve_geometry(geometry)
    if baseline_min is None:
        baseline_min = DEFAULT_BASELINE_MIN.get(name, 0.0)
    fixed = dict(fixed or {})
    if not free:
        raise DesignError("no free parameters")
    for pname, (lo, hi) in free.items():
        _param_key(pname)
        if not lo < hi:
            raise DesignError(f"infeasible bounds for {pname}: [{lo}, {hi}]")
    names = list(free)
    cache = {}

    def evaluate(point):
        key = tuple(float(f"{v:.12g}") for v in point)
        if key not in cache:
            params = {**fixed, **dict(zip(names, key))}
            try:
                cache[key] = switching_contrast(geometry, params, n_harmonics, registry)
            except SingleModeError:
                cache[key] = None
        return cache[key]

    def score(point):
        s = evaluate(point)
        if s is None or s.min_baseline < baseline_min:
            return -np.inf
        return s.contrast

    axes = [np.linspace(lo, hi, grid_points) for lo, hi in free.values()]
    grid = list(itertools.product(*axes))
    scores = np.array([score(p) for p in grid])
    if not np.any(np.isfinite(scores)):
        raise DesignError("no grid point satisfies the baseline constraint")
    unconstrained = np.array([-np.inf if evaluate(p) is None else evaluate(p).contrast for p in grid])
    constraint_active = bool(np.nanmax(unconstrained) > np.max(scores))
    best = list(grid[int(np.argmax(scores))])
    best_score = float(np.max(scores))

    if refine:
        steps = [(hi - lo) / (grid_points - 1) for lo, hi in free.values()]
        for _ in range(2):
            for i, (lo, hi) in enumerate(free.values()):
                a = max(lo, best[i] - steps[i])
                b = min(hi, best[i] + steps[i])

                def neg(x, i=i):
                    trial = list(best)
                    trial[i] = x
                    val = score(trial)
                    return 1e6 if not np.isfinite(val) else -val

                res = minimize_scalar(neg, bounds=(a, b), method="bounded",
                                      options={"xatol": 1e-4 * (hi - lo)})
                if -res.fun > best_score:
                    best[i] = float(res.x)
                    best_score = -float(res.fun)
            steps = [s / 2 for s in steps]

    best_params = {n: float(f"{v:.12g}") for n, v in zip(names, best)}
    sw = evaluate(tuple(best_params.values()))
    return OptimizeResult(best_params, sw.contrast, sw, baseline_min, constraint_active, len(cache))


def spec_hash(spec: SweepSpec) -> str:
    return hashlib.sha256(json.dumps(spec.to_dict(), sort_keys=True).encode()).hexdigest()
