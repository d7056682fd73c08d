"""Figure rendering for completed kse2d runs, via their output files only."""

from .figures import FIGURE_IDS, render_figures
from .io import MissingInput, read_diagnostics, read_drift, read_snapshot

__all__ = [
    "FIGURE_IDS",
    "MissingInput",
    "read_diagnostics",
    "read_drift",
    "read_snapshot",
    "render_figures",
]
