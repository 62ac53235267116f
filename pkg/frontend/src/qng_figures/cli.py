"""Command line front end for rendering artifact figures.

Usage:

    qng-figures --kind bars --artifact thresholds.json --out bars.png

or with a spec file carrying the same fields:

    qng-figures --spec figure.json

Exit codes: 0 on success, 2 for usage problems, 3 for artifacts that
fail schema validation or lack the series a figure kind needs.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .artifacts import (
    ArtifactError,
    BarSeries,
    MissingSeriesError,
    SchemaError,
    extract_bars,
    extract_convergence,
    extract_curve,
    extract_depth_boundary,
    extract_surface_slice,
    load_artifact,
)
from . import render

KINDS = ("bars", "curve", "surface-slice", "depth-boundary", "convergence-log")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3


@dataclass
class FigureSpec:
    """Everything needed to render one figure."""

    kind: str
    artifacts: list[str]
    out: str
    title: str | None = None
    dpi: int = 150
    slice_index: int = 0
    extra: dict[str, Any] = field(default_factory=dict)


class UsageError(Exception):
    """Raised for malformed invocations before any rendering starts."""


def _spec_from_file(path: str) -> dict[str, Any]:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read figure spec {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"figure spec {path} must be a JSON object")
    return data


def _build_spec(args: argparse.Namespace) -> FigureSpec:
    base: dict[str, Any] = {}
    if args.spec is not None:
        base = _spec_from_file(args.spec)

    kind = args.kind if args.kind is not None else base.get("kind")
    artifacts = list(args.artifact) if args.artifact else base.get("artifacts")
    out = args.out if args.out is not None else base.get("out")
    title = args.title if args.title is not None else base.get("title")
    dpi = args.dpi if args.dpi is not None else base.get("dpi", 150)
    slice_index = (
        args.slice if args.slice is not None else base.get("slice_index", 0)
    )

    if kind not in KINDS:
        raise UsageError(
            f"figure kind must be one of {', '.join(KINDS)}, got {kind!r}"
        )
    if not artifacts or not isinstance(artifacts, list):
        raise UsageError("at least one artifact path is required")
    if not out:
        raise UsageError("an output path is required")
    if not isinstance(dpi, int) or isinstance(dpi, bool) or dpi <= 0:
        raise UsageError(f"dpi must be a positive integer, got {dpi!r}")
    if not isinstance(slice_index, int) or isinstance(slice_index, bool):
        raise UsageError(f"slice index must be an integer, got {slice_index!r}")
    return FigureSpec(
        kind=str(kind),
        artifacts=[str(a) for a in artifacts],
        out=str(out),
        title=None if title is None else str(title),
        dpi=dpi,
        slice_index=slice_index,
    )


def _merge_bars(series: list[BarSeries]) -> BarSeries:
    merged = BarSeries([], [], [], series[0].measure)
    for s in series:
        merged.labels.extend(s.labels)
        merged.values.extend(s.values)
        merged.saturated.extend(s.saturated)
    return merged


def render_spec(spec: FigureSpec) -> None:
    """Load the artifacts for a spec, draw the figure, and save it."""
    payloads = [load_artifact(p) for p in spec.artifacts]
    if spec.kind == "bars":
        fig = render.bars_figure(
            _merge_bars([extract_bars(p) for p in payloads]), spec.title
        )
    elif spec.kind == "curve":
        fig = render.curve_figure(
            [extract_curve(p) for p in payloads], spec.title
        )
    elif spec.kind == "surface-slice":
        fig = render.surface_slice_figure(
            [extract_surface_slice(p, spec.slice_index) for p in payloads],
            spec.title,
        )
    elif spec.kind == "depth-boundary":
        fig = render.depth_boundary_figure(
            [extract_depth_boundary(p) for p in payloads], spec.title
        )
    elif spec.kind == "convergence-log":
        fig = render.convergence_figure(
            [extract_convergence(p) for p in payloads], spec.title
        )
    else:
        raise UsageError(f"unknown figure kind {spec.kind!r}")
    render.save_figure(fig, spec.out, dpi=spec.dpi)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qng-figures",
        description="Render figures from exported certification artifacts.",
    )
    parser.add_argument("--kind", choices=KINDS, default=None,
                        help="figure kind to render")
    parser.add_argument("--artifact", action="append", default=None,
                        metavar="PATH",
                        help="artifact JSON file, repeatable")
    parser.add_argument("--out", default=None, metavar="PATH",
                        help="output image path (.png or .svg)")
    parser.add_argument("--spec", default=None, metavar="PATH",
                        help="JSON figure spec supplying defaults for "
                             "the other options")
    parser.add_argument("--title", default=None, help="figure title")
    parser.add_argument("--dpi", type=int, default=None,
                        help="raster resolution (default 150)")
    parser.add_argument("--slice", type=int, default=None,
                        help="error-probability column for surface slices")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        spec = _build_spec(args)
        render_spec(spec)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SchemaError, MissingSeriesError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
