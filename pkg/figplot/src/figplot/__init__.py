"""Figure rendering from hopflens CLI exports.

Each figure id maps to a fixed set of input files expected inside one
directory (the hopflens export convention): a Ricci scalar grid CSV for the
level-set figure, per-scenario trajectory CSVs, and diagnostics JSONs for
the focusing figures. Rendering is read-only and returns a small info dict
describing what was drawn, which the CLI prints as a summary line.
"""

from figplot.render import (
    FIGURE_IDS,
    FigplotError,
    PlotJob,
    render,
)

__version__ = "0.1.0"

__all__ = ["FIGURE_IDS", "FigplotError", "PlotJob", "render", "__version__"]
