"""The 2x2 network matrix connecting two input ports to two output ports."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

PASSIVITY_TOL = 1e-9

PORT_CONVENTION = ("t1: top->bottom transmission, t2: bottom-side reflection, "
                   "t3: top-side reflection, t4: bottom->top transmission")


class PassivityError(ValueError):
    """Network amplifies: largest singular value above 1."""


@dataclass(frozen=True)
class NetworkMatrix:
    """Flux-normalized T = [[t1, t2], [t3, t4]] at one wavelength and port angle.

    Output mode a (leaving through the bottom side) collects ``t1`` of input a
    (entering from the top) and ``t2`` of input b (entering from the bottom);
    output b collects ``t3`` of a and ``t4`` of b.
    """

    t1: complex
    t2: complex
    t3: complex
    t4: complex
    wavelength_nm: float = float("nan")
    angle_deg: float = float("nan")
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("t1", "t2", "t3", "t4"):
            v = complex(getattr(self, name))
            if not np.isfinite(v):
                raise ValueError(f"non-finite network entry {name}={v}")
            object.__setattr__(self, name, v)

    @classmethod
    def from_array(cls, mat, wavelength_nm=float("nan"), angle_deg=float("nan"), **metadata):
        m = np.asarray(mat, dtype=complex)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1], wavelength_nm, angle_deg, metadata)

    def as_array(self) -> np.ndarray:
        return np.array([[self.t1, self.t2], [self.t3, self.t4]])

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.as_array(), compute_uv=False)

    def is_passive(self, tol: float = PASSIVITY_TOL) -> bool:
        return bool(self.singular_values()[0] <= 1.0 + tol)

    def check_passive(self, tol: float = PASSIVITY_TOL) -> "NetworkMatrix":
        smax = self.singular_values()[0]
        if smax > 1.0 + tol:
            raise PassivityError(f"largest singular value {smax:.12g} exceeds 1")
        return self

    def gauge(self, alpha, beta, gamma, delta) -> "NetworkMatrix":
        """diag(e^{i alpha}, e^{i beta}) T diag(e^{i gamma}, e^{i delta}): moved reference planes."""
        left = np.diag(np.exp(1j * np.array([alpha, beta])))
        right = np.diag(np.exp(1j * np.array([gamma, delta])))
        return NetworkMatrix.from_array(left @ self.as_array() @ right,
                                        self.wavelength_nm, self.angle_deg, **self.metadata)

    def to_dict(self) -> dict:
        out = {"wavelength_nm": self.wavelength_nm, "angle_deg": self.angle_deg}
        for name in ("t1", "t2", "t3", "t4"):
            v = getattr(self, name)
            out[name] = [float(f"{v.real:.12g}"), float(f"{v.imag:.12g}")]
        out["passive"] = self.is_passive()
        out["singular_values"] = [float(f"{s:.12g}") for s in self.singular_values()]
        out["metadata"] = dict(self.metadata)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "NetworkMatrix":
        def entry(v):
            if isinstance(v, dict):
                return complex(v["re"], v["im"])
            if isinstance(v, (list, tuple)):
                return complex(v[0], v[1])
            return complex(v)

        return cls(*(entry(data[k]) for k in ("t1", "t2", "t3", "t4")),
                   wavelength_nm=float(data.get("wavelength_nm", float("nan"))),
                   angle_deg=float(data.get("angle_deg", float("nan"))),
                   metadata=dict(data.get("metadata", {})))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "NetworkMatrix":
        return cls.from_dict(json.loads(text))


def identity() -> NetworkMatrix:
    return NetworkMatrix(1, 0, 0, 1)


def balanced_splitter() -> NetworkMatrix:
    """Symmetric lossless 50:50 splitter (1/sqrt 2) [[1, i], [i, 1]]."""
    return NetworkMatrix.from_array(np.array([[1, 1j], [1j, 1]]) / np.sqrt(2))
