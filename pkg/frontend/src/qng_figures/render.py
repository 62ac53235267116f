"""Deterministic figure rendering for certification artifacts.

Each public function draws one figure kind onto a fresh matplotlib
figure and returns it.  Saving goes through save_figure, which renders
to a temporary file and only moves it into place once the write has
finished, so a failed render never leaves a partial image behind.

Determinism: the Agg backend is forced before pyplot is imported, PNG
output drops the Software metadata text chunk, and SVG output pins the
hash salt and drops the Date attribute.  Rendering the same artifact
twice therefore produces byte-identical files.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .artifacts import (
    BarSeries,
    ConvergenceSeries,
    CurveSeries,
    DepthBoundary,
    MissingSeriesError,
    SurfaceSlice,
)

matplotlib.rcParams["svg.hashsalt"] = "qng-figures"

_BAR_COLOR = "#4878cf"
_SATURATED_COLOR = "#b5b5b5"
_CURVE_COLORS = ["#4878cf", "#d65f5f", "#6acc65", "#956cb4", "#c4ad66"]
_BOUNDARY_STYLE = {"color": "#444444", "linestyle": "--", "linewidth": 1.2}


def bars_figure(series: BarSeries, title: str | None = None):
    """Bar chart of threshold values, one bar per family row.

    Every bar is annotated with its numeric value; saturated rows are
    greyed out since their value carries no information beyond the
    bound itself.
    """
    fig, ax = plt.subplots(figsize=(max(4.0, 1.2 * len(series.labels)), 3.6))
    xs = range(len(series.labels))
    colors = [
        _SATURATED_COLOR if sat else _BAR_COLOR for sat in series.saturated
    ]
    ax.bar(xs, series.values, color=colors, width=0.6)
    for x, v in zip(xs, series.values):
        ax.annotate(
            f"{v:.3f}",
            (x, v),
            textcoords="offset points",
            xytext=(0, 3),
            ha="center",
            fontsize=8,
        )
    ax.set_xticks(list(xs))
    ax.set_xticklabels(series.labels, rotation=30, ha="right")
    ax.set_ylabel(f"threshold on {series.measure}")
    ax.set_ylim(0.0, 1.12 * max(max(series.values), 1e-12))
    ax.set_title(title or "certification thresholds")
    fig.tight_layout()
    return fig


def curve_figure(curves: list[CurveSeries], title: str | None = None):
    """Criterion curves over success probability, boundary overlaid.

    The physical boundary, when an artifact carries one, is drawn once
    in a dashed style so the certification region between the curve and
    the boundary stays visible.
    """
    if not curves:
        raise MissingSeriesError("no curves to draw")
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    boundary_drawn = False
    for i, curve in enumerate(curves):
        color = _CURVE_COLORS[i % len(_CURVE_COLORS)]
        ax.plot(curve.probs, curve.values, color=color, label=curve.label)
        if curve.boundary is not None and not boundary_drawn:
            ax.plot(
                curve.probs,
                curve.boundary,
                label="physical boundary",
                **_BOUNDARY_STYLE,
            )
            boundary_drawn = True
    ax.set_xlabel("success probability")
    ax.set_ylabel("criterion threshold")
    ax.set_title(title or "probability-resolved thresholds")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def surface_slice_figure(slices: list[SurfaceSlice], title: str | None = None):
    """Fixed-error-probability cuts through a criterion surface."""
    if not slices:
        raise MissingSeriesError("no surface slices to draw")
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    boundary_drawn = False
    for i, cut in enumerate(slices):
        color = _CURVE_COLORS[i % len(_CURVE_COLORS)]
        label = f"{cut.label}, error prob {cut.error_prob:g}"
        ax.plot(cut.probs, cut.values, color=color, label=label)
        if cut.boundary is not None and not boundary_drawn:
            ax.plot(
                cut.probs,
                cut.boundary,
                label="physical boundary",
                **_BOUNDARY_STYLE,
            )
            boundary_drawn = True
    ax.set_xlabel("number success probability")
    ax.set_ylabel("criterion threshold")
    ax.set_title(title or "surface slices")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def depth_boundary_figure(boundaries: list[DepthBoundary], title: str | None = None):
    """Loss depth against thermal occupation for fixed thresholds."""
    if not boundaries:
        raise MissingSeriesError("no depth boundaries to draw")
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    for i, b in enumerate(boundaries):
        color = _CURVE_COLORS[i % len(_CURVE_COLORS)]
        label = f"threshold {b.threshold:.3f}"
        ax.plot(b.nbars, b.gammas, color=color, marker="o", markersize=3,
                label=label)
        ax.fill_between(b.nbars, b.gammas, color=color, alpha=0.15,
                        linewidth=0)
    ax.set_xlabel("thermal occupation")
    ax.set_ylabel("loss depth")
    ax.set_ylim(bottom=0.0)
    ax.set_title(title or "robustness boundary")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def convergence_figure(series: list[ConvergenceSeries], title: str | None = None):
    """Threshold gap versus truncation size on a log scale."""
    if not series:
        raise MissingSeriesError("no convergence series to draw")
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    floor = 1e-300
    for i, s in enumerate(series):
        color = _CURVE_COLORS[i % len(_CURVE_COLORS)]
        gaps = [max(g, floor) for g in s.gaps]
        ax.semilogy(s.uppers, gaps, color=color, marker="o", markersize=3)
    ax.set_xlabel("truncation size")
    ax.set_ylabel("gap to saturation bound")
    ax.set_title(title or "threshold convergence")
    ax.grid(True, which="both", linewidth=0.3, alpha=0.5)
    fig.tight_layout()
    return fig


def save_figure(fig, out: str | Path, dpi: int = 150) -> None:
    """Write a figure atomically, stripping volatile metadata.

    The image is rendered to a temporary file in the destination
    directory and moved over the target with os.replace, so the target
    either keeps its previous content or holds the complete new image.
    """
    out = Path(out)
    suffix = out.suffix.lower()
    if suffix not in (".png", ".svg"):
        raise ValueError(f"unsupported output format {suffix!r}")
    out.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(
        prefix=out.stem + ".", suffix=suffix, dir=out.parent
    )
    os.close(fd)
    try:
        if suffix == ".png":
            fig.savefig(tmp_name, format="png", dpi=dpi,
                        metadata={"Software": None})
        else:
            fig.savefig(tmp_name, format="svg", dpi=dpi,
                        metadata={"Date": None})
        os.replace(tmp_name, out)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise
    finally:
        plt.close(fig)
