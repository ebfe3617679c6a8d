"""Tabulated optical constants, permittivity conversion and crystallinity mixing.

Time convention throughout the package is exp(-i w t): loss shows up as
k > 0 and Im(eps) > 0.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

DATA_DIR_ENV = "HOMPCM_MATERIAL_DIR"
_PACKAGE_DATA = Path(__file__).parent / "data"

#: phase-change materials: id -> (crystalline table id, amorphous table id)
PHASE_CHANGE = {"GeTe": ("GeTe-crystalline", "GeTe-amorphous")}

#: constant-index media that need no table
CONSTANT_INDEX = {"vacuum": 1.0, "air": 1.0}


class MaterialError(ValueError):
    """Bad optical-constant data or an unresolvable material."""


@dataclass(frozen=True)
class ComplexIndex:
    n: float
    k: float

    def __post_init__(self):
        if not (np.isfinite(self.n) and np.isfinite(self.k)):
            raise MaterialError(f"non-finite index ({self.n}, {self.k})")
        if self.n <= 0:
            raise MaterialError(f"refractive index must be positive, got n={self.n}")
        if self.k < 0:
            raise MaterialError(f"negative extinction coefficient k={self.k} (non-passive)")

    @property
    def value(self) -> complex:
        return complex(self.n, self.k)


@dataclass(frozen=True)
class DispersionTable:
    """Sampled (n, k) versus vacuum wavelength for one material/phase."""

    material_id: str
    wavelength_nm: np.ndarray
    n: np.ndarray
    k: np.ndarray
    source: str = ""

    def __post_init__(self):
        wl = np.asarray(self.wavelength_nm, dtype=float)
        n = np.asarray(self.n, dtype=float)
        k = np.asarray(self.k, dtype=float)
        if wl.ndim != 1 or wl.shape != n.shape or wl.shape != k.shape:
            raise MaterialError("wavelength, n and k must be 1D arrays of equal length")
        if wl.size < 2:
            raise MaterialError(f"{self.material_id}: need at least 2 samples")
        if np.any(np.diff(wl) <= 0):
            raise MaterialError(f"{self.material_id}: non-monotone wavelengths")
        if np.any(n <= 0):
            raise MaterialError(f"{self.material_id}: refractive index must be positive")
        if np.any(k < 0):
            raise MaterialError(f"{self.material_id}: negative k")
        for name, arr in (("wavelength_nm", wl), ("n", n), ("k", k)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def span(self) -> tuple[float, float]:
        return float(self.wavelength_nm[0]), float(self.wavelength_nm[-1])

    def __len__(self):
        return self.wavelength_nm.size


def load_dispersion(path, material_id: str | None = None) -> DispersionTable:
    """Read a ``wavelength_nm,n,k`` CSV with a ``# material=<id> source=<text>`` header.

    ``material_id`` overrides the id found in the header.
    """
    path = Path(path)
    header_id, source = None, ""
    wl, ns, ks = [], [], []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                for token in line[1:].split():
                    key, _, val = token.partition("=")
                    if key == "material":
                        header_id = val
                    elif key == "source":
                        source = val
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise MaterialError(f"{path}:{lineno}: expected 3 columns, got {len(parts)}")
            try:
                w, n, k = (float(p) for p in parts)
            except ValueError as exc:
                raise MaterialError(f"{path}:{lineno}: {exc}") from None
            if wl and w <= wl[-1]:
                raise MaterialError(f"{path}:{lineno}: non-monotone wavelength {w}")
            if k < 0:
                raise MaterialError(f"{path}:{lineno}: negative k")
            wl.append(w)
            ns.append(n)
            ks.append(k)
    mid = material_id or header_id or path.stem
    return DispersionTable(mid, np.array(wl), np.array(ns), np.array(ks), source)


def _check_range(table: DispersionTable, wavelength_nm):
    lo, hi = table.span
    w = np.asarray(wavelength_nm, dtype=float)
    if np.any(w < lo) or np.any(w > hi):
        raise MaterialError(
            f"{table.material_id}: wavelength {wavelength_nm} nm outside table [{lo}, {hi}]")
    return w


def index_at(table: DispersionTable, wavelength_nm: float) -> ComplexIndex:
    w = _check_range(table, wavelength_nm)
    return ComplexIndex(float(np.interp(w, table.wavelength_nm, table.n)),
                        float(np.interp(w, table.wavelength_nm, table.k)))


def index_array(table: DispersionTable, wavelength_nm) -> np.ndarray:
    """Vectorized :func:`index_at` returning complex n + ik."""
    w = _check_range(table, wavelength_nm)
    return np.interp(w, table.wavelength_nm, table.n) + 1j * np.interp(w, table.wavelength_nm, table.k)


def permittivity(idx) -> complex:
    """eps = (n + ik)^2 for a ComplexIndex or a complex n + ik."""
    v = idx.value if isinstance(idx, ComplexIndex) else idx
    return v * v


def index_from_permittivity(eps: complex) -> ComplexIndex:
    """Inverse of :func:`permittivity` on the passive branch (k >= 0, n > 0)."""
    eps = complex(eps)
    if eps == 0:
        raise MaterialError("zero permittivity has no index")
    if eps.imag < 0:
        raise MaterialError(f"non-passive permittivity {eps}")
    if eps.imag == 0 and eps.real < 0:
        raise MaterialError(f"permittivity {eps} gives a purely imaginary index (n = 0)")
    root = np.sqrt(eps)
    if root.imag < 0:
        root = -root
    return ComplexIndex(float(root.real), float(root.imag))


def mix_crystallinity(eps_c, eps_a, kappa):
    """Linear blend kappa * eps_c + (1 - kappa) * eps_a of phase permittivities."""
    kap = np.asarray(kappa, dtype=float)
    if np.any(kap < 0) or np.any(kap > 1) or not np.all(np.isfinite(kap)):
        raise MaterialError(f"crystallinity must lie in [0, 1], got {kappa}")
    if kap.ndim == 0:
        kap = float(kap)
        if kap == 0.0:
            return eps_a
        if kap == 1.0:
            return eps_c
    return kap * eps_c + (1.0 - kap) * eps_a


def data_dir() -> Path:
    override = os.environ.get(DATA_DIR_ENV)
    return Path(override) if override else _PACKAGE_DATA


class MaterialRegistry:
    """Resolves material ids to permittivities, loading tables lazily from a directory."""

    def __init__(self, directory=None):
        self.directory = Path(directory) if directory is not None else data_dir()
        self._tables: dict[str, DispersionTable] = {}

    def table(self, material_id: str) -> DispersionTable:
        if material_id not in self._tables:
            path = self.directory / f"{material_id}.csv"
            if not path.exists():
                raise MaterialError(f"unknown material {material_id!r} (no {path})")
            self._tables[material_id] = load_dispersion(path, material_id)
        return self._tables[material_id]

    def add(self, table: DispersionTable):
        self._tables[table.material_id] = table

    def is_phase_change(self, material_id: str) -> bool:
        return material_id in PHASE_CHANGE

    def eps(self, material_id: str, wavelength_nm, kappa=None) -> np.ndarray:
        """Permittivity at one or many wavelengths.

        Phase-change ids need ``kappa``; other ids reject it silently.
        """
        w = np.asarray(wavelength_nm, dtype=float)
        if material_id in CONSTANT_INDEX:
            return np.full(w.shape, CONSTANT_INDEX[material_id] ** 2 + 0j)
        if material_id in PHASE_CHANGE:
            if kappa is None:
                raise MaterialError(f"{material_id} layer needs a crystallinity kappa")
            cid, aid = PHASE_CHANGE[material_id]
            eps_c = index_array(self.table(cid), w) ** 2
            eps_a = index_array(self.table(aid), w) ** 2
            return mix_crystallinity(eps_c, eps_a, kappa)
        return index_array(self.table(material_id), w) ** 2

    def file_hashes(self) -> dict[str, str]:
        """sha256 of every table loaded so far."""
        out = {}
        for mid in sorted(self._tables):
            path = self.directory / f"{mid}.csv"
            if path.exists():
                out[mid] = hashlib.sha256(path.read_bytes()).hexdigest()
        return out


@lru_cache(maxsize=None)
def default_registry() -> MaterialRegistry:
    return MaterialRegistry()
