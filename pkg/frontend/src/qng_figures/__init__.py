"""Figure rendering for exported coherence-certification artifacts.

This package consumes the JSON artifacts written by the ``qng`` command
line tool and turns them into publication-style figures.  It never
imports the certification library itself; the artifact files are the
only interface between the two.
"""

from .artifacts import (
    ArtifactError,
    BarSeries,
    ConvergenceSeries,
    CurveSeries,
    DepthBoundary,
    MissingSeriesError,
    SchemaError,
    SurfaceSlice,
    extract_bars,
    extract_convergence,
    extract_curve,
    extract_depth_boundary,
    extract_surface_slice,
    load_artifact,
)
from .cli import KINDS, FigureSpec, UsageError, main, render_spec
from .render import save_figure

__all__ = [
    "ArtifactError",
    "BarSeries",
    "ConvergenceSeries",
    "CurveSeries",
    "DepthBoundary",
    "FigureSpec",
    "KINDS",
    "MissingSeriesError",
    "SchemaError",
    "SurfaceSlice",
    "UsageError",
    "extract_bars",
    "extract_convergence",
    "extract_curve",
    "extract_depth_boundary",
    "extract_surface_slice",
    "load_artifact",
    "main",
    "render_spec",
    "save_figure",
]

__version__ = "0.1.0"
