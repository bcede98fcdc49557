"""Offline figure rendering for momlab CSV/JSON outputs.

Communicates with the simulator only through its file formats; no direct
imports.  Every renderer is deterministic: identical inputs plus the fixed
style configuration produce byte-identical image files.
"""

__version__ = "0.1.0"

from .jobs import FigureJob, SchemaError
from .render import KINDS, render

__all__ = ["FigureJob", "KINDS", "SchemaError", "render", "__version__"]
