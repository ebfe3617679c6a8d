"""Two-photon interference at phase-change metasurfaces.

Electromagnetic solvers (:mod:`hompcm.tmm`, :mod:`hompcm.rcwa`) turn layered
and grated structures into complex 2x2 network matrices; :mod:`hompcm.quantum`
maps those to coincidence statistics; :mod:`hompcm.design` sweeps and
optimizes; :mod:`hompcm.thermal` models the joule-heating pulse.
"""

from ._accel import backend
from .network import NetworkMatrix
from .quantum import baseline, coalescence, total_phase

__version__ = "0.1.0"

__all__ = ["NetworkMatrix", "backend", "baseline", "coalescence", "total_phase", "__version__"]
