"""momlab: a laboratory for measurement-only stabilizer dynamics."""

__version__ = "0.1.0"

from .pauli import BitMatrix, DimensionError, PauliString, gf2_kernel, gf2_rank
from .tableau import (
    CliffordGate,
    GaugeError,
    InvalidMeasurementError,
    MeasurementResult,
    StabilizerTableau,
)
from .dense import DenseState

__all__ = [
    "BitMatrix",
    "CliffordGate",
    "DenseState",
    "DimensionError",
    "GaugeError",
    "InvalidMeasurementError",
    "MeasurementResult",
    "PauliString",
    "StabilizerTableau",
    "gf2_kernel",
    "gf2_rank",
    "__version__",
]
