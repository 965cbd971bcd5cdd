"""Publication-style figures from fbmc-sim CSV files.

This package knows nothing about the simulator: it reads the documented
CSV schemas (ccdf, ber, psd) and renders one figure per file.
"""

__version__ = "0.1.0"

from .render import FigureJob, FigureKind, SchemaError, build_figure, render
