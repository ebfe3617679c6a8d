"""Command-line front end: ``hompcm <subcommand> ...``.

Every subcommand writes plot-ready CSV or JSON, to stdout or to ``--out``.
When ``--out`` is given, a ``<out>.manifest.json`` run manifest (command line,
input hashes, version, timestamp, outputs) is written next to it.

Exit codes: 0 success, 2 invalid input (including single-mode violations),
3 solver failure.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, design, geometry as geo, quantum, thermal
from ._accel import backend
from .materials import CONSTANT_INDEX, PHASE_CHANGE, MaterialError, default_registry, index_at, index_from_permittivity
from .network import NetworkMatrix
from .rcwa import DEFAULT_HARMONICS, SolverError, network_matrix_from_grating
from .tmm import network_matrix_from_stack

EXIT_OK, EXIT_INVALID, EXIT_SOLVER = 0, 2, 3

WAVELENGTH_AXIS = ("wavelength_nm", 770.0, 900.0, 131)

SWEEP_REPLICAS = {
    "fig2a": ("structure-A", ("filling_ratio", 0.0, 1.0, 101), WAVELENGTH_AXIS, {"crystallinity": 1.0}),
    "fig2b": ("structure-A", ("filling_ratio", 0.0, 1.0, 101), WAVELENGTH_AXIS, {"crystallinity": 0.0}),
    "fig3a": ("structure-B", ("layer_thickness:2", 200.0, 500.0, 101), WAVELENGTH_AXIS,
              {"crystallinity": 1.0}),
    "fig3b": ("structure-B", ("layer_thickness:2", 200.0, 500.0, 101), WAVELENGTH_AXIS,
              {"crystallinity": 0.0}),
    "fig4a": ("structure-A", ("crystallinity", 0.0, 1.0, 101), WAVELENGTH_AXIS, {}),
    "fig4b": ("structure-B", ("crystallinity", 0.0, 1.0, 101), WAVELENGTH_AXIS, {}),
}

HOM_REPLICAS = {"fig5a": "structure-A", "fig5b": "structure-B"}
HOM_REPLICA_KAPPAS = (0.0, 0.25, 0.5, 0.75, 1.0)

OPTIMIZE_DEFAULT_FREE = {"structure-A": "filling_ratio:0:1", "structure-B": "layer_thickness:2:200:500"}


class CLIError(ValueError):
    """Invalid command-line input."""


def fmt(x) -> str:
    """12 significant digits, the output precision of every subcommand."""
    return f"{x + 0.0:.12g}"  # + 0.0 folds -0.0 into 0


def _round(x):
    if isinstance(x, dict):
        return {k: _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v) for v in x]
    if isinstance(x, (float, np.floating)):
        return float(fmt(x)) if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# --------------------------------------------------------------------------
# output plumbing
# --------------------------------------------------------------------------

class Run:
    """Collects input hashes and output paths for the run manifest."""

    def __init__(self, args, argv):
        self.args = args
        self.argv = list(argv)
        self.inputs: dict[str, str] = {}
        self.outputs: list[str] = []

    def add_input(self, path):
        self.inputs[str(path)] = _sha256(path)

    def add_materials(self, hashes: dict):
        for mid, h in hashes.items():
            self.inputs[f"material:{mid}"] = h

    def emit(self, text: str, suffix: str | None = None):
        """Write ``text`` to ``--out`` (optionally with a replaced suffix) or stdout."""
        if self.args.out is None:
            sys.stdout.write(text if text.endswith("\n") else text + "\n")
            return None
        path = Path(self.args.out)
        if suffix is not None:
            path = path.with_suffix(suffix)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text if text.endswith("\n") else text + "\n")
        self.outputs.append(str(path))
        return path

    def register(self, path):
        self.outputs.append(str(path))

    def manifest(self) -> dict:
        return {"command": ["hompcm", *self.argv], "inputs": dict(sorted(self.inputs.items())),
                "version": __version__, "backend": backend(),
                "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
                "outputs": self.outputs}

    def finish(self):
        if self.args.out is not None:
            path = Path(str(self.args.out) + ".manifest.json")
            path.write_text(json.dumps(self.manifest(), indent=2) + "\n")


def _dump_json(obj) -> str:
    return json.dumps(_round(obj), indent=2, sort_keys=True)


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(v if isinstance(v, str) else fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# geometry flags
# --------------------------------------------------------------------------

def _add_geometry_flags(p, wavelength=True):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=sorted(geo.PRESETS), help="built-in device geometry")
    src.add_argument("--stack", type=Path, help="geometry JSON file (layers top to bottom)")
    if wavelength:
        p.add_argument("--wavelength", type=float, default=810.0, help="free-space wavelength, nm")
    p.add_argument("--angle", type=float, default=45.0, help="port angle in the incidence medium, deg")
    p.add_argument("--kappa", type=float, default=None,
                   help="crystallinity of every GeTe layer (0 amorphous, 1 crystalline)")
    p.add_argument("--period", type=float, default=None, help="grating period, nm (gratings only)")
    p.add_argument("--filling", type=float, default=None, help="strip filling ratio (gratings only)")
    p.add_argument("--harmonics", type=int, default=DEFAULT_HARMONICS,
                   help="retained Fourier harmonics for gratings (odd)")


def _geometry(args, run: Run):
    if args.stack is not None:
        run.add_input(args.stack)
        g = geo.load_geometry(args.stack)
    elif args.preset is not None:
        g = geo.preset(args.preset)
    else:
        raise CLIError("give --preset or --stack")
    if args.kappa is not None:
        g = g.with_kappa(args.kappa)
    if args.period is not None or args.filling is not None:
        if not isinstance(g, geo.Grating1D):
            raise CLIError("--period/--filling only apply to gratings")
        if args.period is not None:
            g = g.with_period(args.period)
        if args.filling is not None:
            g = g.with_filling_ratio(args.filling)
    return g


def _network(g, wavelength, angle, harmonics) -> NetworkMatrix:
    if isinstance(g, geo.Grating1D):
        return network_matrix_from_grating(g, wavelength, angle, harmonics)
    return network_matrix_from_stack(g, wavelength, angle)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_material(args, run: Run):
    """Complex index and permittivity of one material at one or more wavelengths."""
    reg = default_registry()
    wls = np.asarray(args.wavelength, dtype=float)
    rows = []
    for wl in wls:
        eps = complex(reg.eps(args.material, wl, args.kappa))
        if args.material in PHASE_CHANGE or args.material in CONSTANT_INDEX:
            idx = index_from_permittivity(eps)
        else:
            idx = index_at(reg.table(args.material), wl)
        rows.append((wl, idx.n, idx.k, eps.real, eps.imag))
    run.add_materials(reg.file_hashes())
    header = ["wavelength_nm", "n", "k", "eps_re", "eps_im"]
    if args.format == "json":
        run.emit(_dump_json({"material": args.material, "kappa": args.kappa,
                             "rows": [dict(zip(header, r)) for r in rows]}))
    else:
        run.emit(_csv(header, rows))


def cmd_network(args, run: Run):
    """Network matrix of a preset or geometry file, printed as JSON."""
    g = _geometry(args, run)
    net = _network(g, args.wavelength, args.angle, args.harmonics)
    run.add_materials(design.material_hashes(g))
    run.emit(net.to_json())


def _load_networks(path: Path):
    data = json.loads(path.read_text())
    return [NetworkMatrix.from_dict(d) for d in (data if isinstance(data, list) else [data])]


def cmd_coalescence(args, run: Run):
    """Coalescence, baseline and total phase of network JSON file(s)."""
    rows = []
    for path in args.network:
        run.add_input(path)
        for net in _load_networks(path):
            c = float(quantum.coalescence(net))
            b = float(quantum.baseline(net))
            try:
                phase = float(quantum.total_phase(net))
            except quantum.QuantumError:
                phase = float("nan")
            rows.append((str(path), c, b, phase, net.is_passive()))
    if args.format == "json":
        run.emit(_dump_json([{"file": f, "coalescence": c, "baseline": b, "total_phase": p,
                              "passive": ok} for f, c, b, p, ok in rows]))
    elif len(rows) == 1 and args.out is None:
        run.emit(fmt(rows[0][1]))
    else:
        run.emit(_csv(["file", "coalescence", "baseline", "total_phase", "passive"],
                      [(f, c, b, p, str(int(ok))) for f, c, b, p, ok in rows]))


def _delays(args):
    half = args.range_ps * 1e-12
    return np.linspace(-half, half, args.points)


def _omega(bandwidth_thz: float) -> float:
    """Angular bandwidth (rad/s) from a bandwidth given in THz."""
    if not bandwidth_thz > 0:
        raise CLIError("--bandwidth-thz must be positive")
    return 2 * np.pi * bandwidth_thz * 1e12


def cmd_hom(args, run: Run):
    """Baseline-normalized coincidence trace versus delay."""
    if args.points < 2 or not args.range_ps > 0:
        raise CLIError("--points must be >= 2 and --range-ps positive")
    omega = _omega(args.bandwidth_thz)
    delays = _delays(args)
    columns, labels = [], []
    if args.replica:
        g0 = geo.preset(HOM_REPLICAS[args.replica])
        for kappa in HOM_REPLICA_KAPPAS:
            net = _network(g0.with_kappa(kappa), args.wavelength, args.angle, args.harmonics)
            columns.append(quantum.hom_trace_gaussian(net, omega, delays).counts)
            labels.append(f"counts_kappa_{kappa:g}")
        run.add_materials(design.material_hashes(g0))
    elif args.network is not None:
        run.add_input(args.network)
        net = _load_networks(args.network)[0]
        columns.append(quantum.hom_trace_gaussian(net, omega, delays).counts)
        labels.append("counts")
    else:
        g = _geometry(args, run)
        net = _network(g, args.wavelength, args.angle, args.harmonics)
        columns.append(quantum.hom_trace_gaussian(net, omega, delays).counts)
        labels.append("counts")
        run.add_materials(design.material_hashes(g))
    if args.format == "json":
        run.emit(_dump_json({"delay_s": delays.tolist(), "bandwidth_rad_s": omega,
                             **{lab: col.tolist() for lab, col in zip(labels, columns)}}))
    else:
        run.emit(_csv(["delay_s", *labels], zip(delays, *columns)))


def _parse_axis(text: str) -> design.Axis:
    parts = text.rsplit(":", 3)
    if len(parts) != 4:
        raise CLIError(f"axis {text!r}: expected name:min:max:steps")
    try:
        return design.Axis(parts[0], float(parts[1]), float(parts[2]), int(parts[3]))
    except ValueError as exc:
        raise CLIError(f"axis {text!r}: {exc}") from None


def _parse_fixed(items) -> dict:
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise CLIError(f"--fixed {item!r}: expected name=value")
        design._param_key(name)
        out[name] = float(value)
    return out


def _sweep_spec(args) -> design.SweepSpec:
    if args.replica:
        geom, ax1, ax2, fixed = SWEEP_REPLICAS[args.replica]
        return design.SweepSpec(geom, design.Axis(*ax1), design.Axis(*ax2), dict(fixed), args.harmonics)
    if not (args.geometry and args.axis1 and args.axis2):
        raise CLIError("give --replica, or --geometry with --axis1 and --axis2")
    return design.SweepSpec(args.geometry, _parse_axis(args.axis1), _parse_axis(args.axis2),
                            _parse_fixed(args.fixed), args.harmonics)


def cmd_sweep(args, run: Run):
    """Dense coalescence/baseline grid over two parameters."""
    spec = _sweep_spec(args)
    if Path(str(spec.geometry)).exists():
        run.add_input(spec.geometry)
    result = design.run_sweep(spec, jobs=args.jobs)
    run.add_materials(result.material_hashes)
    if args.format == "json":
        run.emit(_dump_json({**result.metadata(), "axis1": result.axis1.tolist(),
                             "axis2": result.axis2.tolist(),
                             "coalescence": result.coalescence.tolist(),
                             "baseline": result.baseline.tolist(),
                             "valid": result.valid.tolist()}))
    elif args.out is None:
        sys.stdout.write(result.csv_text())
    else:
        path = Path(args.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        result.write(path)
        run.register(path)
        run.register(path.with_suffix(".json"))


def _parse_free(items, geometry_name) -> dict:
    if not items:
        if geometry_name not in OPTIMIZE_DEFAULT_FREE:
            raise CLIError("give at least one --free name:low:high")
        items = [OPTIMIZE_DEFAULT_FREE[geometry_name]]
    out = {}
    for item in items:
        parts = item.rsplit(":", 2)
        if len(parts) != 3:
            raise CLIError(f"--free {item!r}: expected name:low:high")
        try:
            out[parts[0]] = (float(parts[1]), float(parts[2]))
        except ValueError:
            raise CLIError(f"--free {item!r}: bounds must be numbers") from None
    return out


def cmd_optimize(args, run: Run):
    """Maximize switching contrast subject to the baseline floor in both phases."""
    if Path(args.geometry).exists():
        run.add_input(args.geometry)
    free = _parse_free(args.free, args.geometry)
    fixed = _parse_fixed(args.fixed)
    fixed.setdefault("wavelength_nm", args.wavelength)
    result = design.optimize_contrast(args.geometry, free, args.baseline_min, fixed,
                                      grid_points=args.grid_points, refine=not args.no_refine,
                                      n_harmonics=args.harmonics)
    run.add_materials(design.material_hashes(design.resolve_geometry(args.geometry)))
    out = {"geometry": args.geometry, "free": free, "fixed": fixed, **result.to_dict()}
    if args.format == "csv":
        rows = [(k, v) for k, v in result.params.items()]
        rows += [("contrast", result.contrast), ("coal_crystalline", result.switching.coal_crystalline),
                 ("coal_amorphous", result.switching.coal_amorphous),
                 ("min_baseline", result.switching.min_baseline),
                 ("constraint_active", str(int(result.constraint_active)))]
        run.emit(_csv(["name", "value"], rows))
    else:
        run.emit(_dump_json(out))


def _thermal_inputs(args, run: Run):
    if args.replica or args.stack is None:
        stack = thermal.structure_b_thermal(args.substrate_nm)
        run.add_input(thermal.data_dir() / "thermal_constants.csv")
    else:
        run.add_input(args.stack)
        stack = thermal.load_thermal_stack(args.stack)
    if args.replica or args.pulse is None:
        pulse = thermal.preset_pulse()
        run.add_input(thermal.data_dir() / "pulse_structure_b.csv")
    else:
        run.add_input(args.pulse)
        pulse = thermal.load_pulse(args.pulse)
    return stack, pulse


def cmd_thermal(args, run: Run):
    """1D transient joule heating; writes the field and per-layer traces."""
    stack, pulse = _thermal_inputs(args, run)
    grid = thermal.GridSpec(args.max_cell_nm, thermal.GridSpec.min_cells_per_layer, args.dt_ns * 1e-9)
    field = thermal.solve_heat_1d(stack, pulse, args.duration_ns * 1e-9,
                                  (args.top, args.bottom), grid, args.ambient)
    labels, traces = [], []
    for i, layer in enumerate(stack):
        if layer.material == "GeTe" or layer.is_heater:
            labels.append(f"layer{i}_{layer.material}_K")
            traces.append(field.layer_temperature(i))
    power = pulse(field.time_s)
    trace_csv = _csv(["time_s", "power_W_m2", *labels], zip(field.time_s, power, *traces))
    summary = {"peak_K": {lab: float(t.max()) for lab, t in zip(labels, traces)},
               "peak_time_s": {lab: float(field.time_s[int(np.argmax(t))]) for lab, t in zip(labels, traces)},
               "ambient_K": args.ambient, "pulse_energy_J_m2": float(pulse.energy(field.time_s[-1])),
               "cells": int(field.depth_nm.size), "steps": int(field.time_s.size - 1)}
    if args.out is None:
        run.emit(_dump_json(summary) if args.format == "json" else trace_csv)
        return
    out = Path(args.out)
    if args.format == "json":
        run.emit(_dump_json({**summary, "time_s": field.time_s.tolist(),
                             **{lab: t.tolist() for lab, t in zip(labels, traces)}}))
    else:
        run.emit(trace_csv)
    field_path = out.with_name(out.stem + "_field.csv")
    field.to_csv(field_path)
    run.register(field_path)


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hompcm", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    p.add_argument("--out", type=Path, default=None, help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="output format")
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("material", help="optical constants of one material")
    m.add_argument("material", help="material id, e.g. SiO2 or GeTe")
    m.add_argument("--wavelength", type=float, nargs="+", default=[810.0], help="nm")
    m.add_argument("--kappa", type=float, default=None, help="crystallinity for phase-change ids")
    m.set_defaults(func=cmd_material)

    n = sub.add_parser("network", help="2x2 network matrix as JSON")
    _add_geometry_flags(n)
    n.set_defaults(func=cmd_network)

    c = sub.add_parser("coalescence", help="coalescence of network JSON file(s)")
    c.add_argument("network", type=Path, nargs="+", help="NetworkMatrix JSON written by 'network'")
    c.set_defaults(func=cmd_coalescence)

    h = sub.add_parser("hom", help="Gaussian HOM coincidence trace")
    _add_geometry_flags(h)
    h.add_argument("--network", type=Path, default=None, help="NetworkMatrix JSON instead of a geometry")
    h.add_argument("--replica", choices=sorted(HOM_REPLICAS), default=None,
                   help="traces for kappa = 0, 0.25, 0.5, 0.75, 1 on a preset")
    h.add_argument("--bandwidth-thz", type=float, default=2.0,
                   help="two-photon bandwidth; the angular width is 2 pi times this")
    h.add_argument("--range-ps", type=float, default=3.0, help="delays span [-range, range] ps")
    h.add_argument("--points", type=int, default=301)
    h.set_defaults(func=cmd_hom)

    s = sub.add_parser("sweep", help="two-parameter coalescence grid")
    s.add_argument("--replica", choices=sorted(SWEEP_REPLICAS), default=None)
    s.add_argument("--geometry", default=None, help="preset name or geometry JSON")
    s.add_argument("--axis1", default=None, help="name:min:max:steps")
    s.add_argument("--axis2", default=None, help="name:min:max:steps")
    s.add_argument("--fixed", action="append", help="name=value, repeatable")
    s.add_argument("--harmonics", type=int, default=DEFAULT_HARMONICS)
    s.set_defaults(func=cmd_sweep)

    o = sub.add_parser("optimize", help="maximize switching contrast under a baseline floor")
    o.add_argument("--geometry", default="structure-A", help="preset name or geometry JSON")
    o.add_argument("--free", action="append", help="name:low:high, repeatable")
    o.add_argument("--fixed", action="append", help="name=value, repeatable")
    o.add_argument("--wavelength", type=float, default=810.0)
    o.add_argument("--baseline-min", type=float, default=None,
                   help="default 1/12 for structure-A, 1/16 for structure-B")
    o.add_argument("--grid-points", type=int, default=21)
    o.add_argument("--no-refine", action="store_true", help="grid scan only")
    o.add_argument("--harmonics", type=int, default=DEFAULT_HARMONICS)
    o.set_defaults(func=cmd_optimize)

    t = sub.add_parser("thermal", help="1D joule-heating transient")
    t.add_argument("--replica", choices=("fig6",), default=None,
                   help="structure-B stack with the shipped calibrated pulse")
    t.add_argument("--stack", type=Path, default=None,
                   help="CSV material,thickness_nm,k_W_mK,rho_c_J_m3K,is_heater")
    t.add_argument("--pulse", type=Path, default=None, help="CSV time_s,power_W_m2")
    t.add_argument("--substrate-nm", type=float, default=2000.0)
    t.add_argument("--duration-ns", type=float, default=1500.0)
    t.add_argument("--dt-ns", type=float, default=1.0)
    t.add_argument("--max-cell-nm", type=float, default=5.0)
    t.add_argument("--top", choices=("insulated", "fixed"), default="insulated")
    t.add_argument("--bottom", choices=("insulated", "fixed"), default="fixed")
    t.add_argument("--ambient", type=float, default=thermal.AMBIENT_K, help="K")
    t.set_defaults(func=cmd_thermal)
    return p


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    run = Run(args, argv)
    try:
        args.func(args, run)
    except (SolverError, np.linalg.LinAlgError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValueError, MaterialError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    run.finish()
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
