"""Loading and validation of exported certification artifacts.

Artifacts are the JSON files written by the ``qng`` command line tool.
Every artifact carries ``schema_version`` and ``command`` fields next to
the payload.  This module checks those fields and extracts the series a
figure needs, so the renderer can assume well-formed input.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

SCHEMA_VERSION = 1


class ArtifactError(Exception):
    """Base class for artifact problems."""


class SchemaError(ArtifactError):
    """Raised when a file is not a supported artifact."""


class MissingSeriesError(ArtifactError):
    """Raised when an artifact lacks the data a figure kind needs."""


def load_artifact(path: str | Path) -> dict[str, Any]:
    """Read one artifact file and validate its envelope.

    Raises SchemaError if the file is not JSON, is not an object, or
    declares a schema version other than the supported one.
    """
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read artifact {p}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"artifact {p} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError(f"artifact {p} must be a JSON object")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaError(
            f"artifact {p} has schema_version {version!r}, "
            f"expected {SCHEMA_VERSION}"
        )
    if "command" not in data:
        raise SchemaError(f"artifact {p} is missing the command field")
    return data


def _require(data: dict[str, Any], key: str, where: str) -> Any:
    if key not in data:
        raise MissingSeriesError(f"{where} is missing {key!r}")
    return data[key]


def _float_list(values: Any, where: str) -> list[float]:
    if not isinstance(values, list) or not values:
        raise MissingSeriesError(f"{where} must be a non-empty list")
    out = []
    for v in values:
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise MissingSeriesError(f"{where} contains a non-numeric entry")
        out.append(float(v))
    return out


@dataclass
class BarSeries:
    """Labelled values for a bar chart, one bar per threshold row."""

    labels: list[str]
    values: list[float]
    saturated: list[bool]
    measure: str


@dataclass
class CurveSeries:
    """A criterion value curve over a success probability axis."""

    probs: list[float]
    values: list[float]
    label: str
    boundary: list[float] | None


@dataclass
class SurfaceSlice:
    """One fixed-error-probability column of a criterion surface."""

    probs: list[float]
    values: list[float]
    error_prob: float
    label: str
    boundary: list[float] | None


@dataclass
class DepthBoundary:
    """A loss-depth versus thermal-occupation trade-off curve."""

    nbars: list[float]
    gammas: list[float]
    threshold: float


@dataclass
class ConvergenceSeries:
    """Threshold gap against truncation size for a convergence study."""

    uppers: list[int]
    gaps: list[float]


def _measure_label(data: dict[str, Any]) -> str:
    config = data.get("config")
    if isinstance(config, dict):
        m = config.get("m")
        n = config.get("n")
        if isinstance(m, int) and isinstance(n, int):
            return f"C[{m},{n}]"
    return "criterion value"


def extract_bars(data: dict[str, Any]) -> BarSeries:
    """Pull bar-chart rows from a thresholds artifact."""
    rows = _require(data, "rows", "thresholds artifact")
    if not isinstance(rows, list) or not rows:
        raise MissingSeriesError("thresholds artifact has no rows")
    labels = []
    values = []
    saturated = []
    for i, row in enumerate(rows):
        if not isinstance(row, dict):
            raise MissingSeriesError(f"thresholds row {i} is not an object")
        label = _require(row, "label", f"thresholds row {i}")
        value = _require(row, "value", f"thresholds row {i}")
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise MissingSeriesError(f"thresholds row {i} value is not numeric")
        labels.append(str(label))
        values.append(float(value))
        saturated.append(bool(row.get("saturated", False)))
    return BarSeries(labels, values, saturated, _measure_label(data))


def extract_curve(data: dict[str, Any]) -> CurveSeries:
    """Pull a 2D criterion curve, with its physical boundary if present."""
    curve = _require(data, "curve", "curve artifact")
    if not isinstance(curve, dict):
        raise MissingSeriesError("curve payload is not an object")
    probs = _float_list(_require(curve, "probs", "curve payload"), "curve probs")
    values = _float_list(_require(curve, "values", "curve payload"), "curve values")
    if len(probs) != len(values):
        raise MissingSeriesError("curve probs and values differ in length")
    family = curve.get("family")
    kind = curve.get("kind", "curve")
    label = str(family) if family else str(kind)
    boundary = _extract_boundary(data, probs)
    return CurveSeries(probs, values, label, boundary)


def _extract_boundary(data: dict[str, Any], probs: list[float]) -> list[float] | None:
    raw = data.get("physical_boundary")
    if raw is None:
        return None
    if isinstance(raw, dict):
        bvals = raw.get("values")
        bprobs = raw.get("probs")
        if isinstance(bvals, list) and bvals:
            vals = _float_list(bvals, "physical boundary values")
            if isinstance(bprobs, list) and len(bprobs) == len(vals):
                got = _float_list(bprobs, "physical boundary probs")
                if len(got) == len(probs):
                    return vals
            if len(vals) == len(probs):
                return vals
            raise MissingSeriesError(
                "physical boundary length does not match the curve"
            )
    raise MissingSeriesError("physical boundary payload is malformed")


def extract_surface_slice(data: dict[str, Any], index: int) -> SurfaceSlice:
    """Pull one error-probability column from a surface artifact."""
    surface = _require(data, "surface", "surface artifact")
    if not isinstance(surface, dict):
        raise MissingSeriesError("surface payload is not an object")
    probs = _float_list(
        _require(surface, "probs_number", "surface payload"), "surface probs"
    )
    perr = _float_list(
        _require(surface, "probs_error", "surface payload"), "surface error probs"
    )
    values = _require(surface, "values", "surface payload")
    if not isinstance(values, list) or len(values) != len(probs):
        raise MissingSeriesError("surface values do not match the probability grid")
    if not 0 <= index < len(perr):
        raise MissingSeriesError(
            f"slice index {index} outside 0..{len(perr) - 1}"
        )
    column = []
    for i, row in enumerate(values):
        if not isinstance(row, list) or len(row) != len(perr):
            raise MissingSeriesError(f"surface values row {i} is malformed")
        v = row[index]
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise MissingSeriesError(f"surface values row {i} is not numeric")
        column.append(float(v))
    family = surface.get("family")
    label = str(family) if family else "surface"
    boundary = _extract_boundary(data, probs)
    return SurfaceSlice(probs, column, perr[index], label, boundary)


def extract_depth_boundary(data: dict[str, Any]) -> DepthBoundary:
    """Pull the loss/thermal trade-off sweep from a depth artifact."""
    boundary = _require(data, "boundary", "depth artifact")
    if not isinstance(boundary, list) or not boundary:
        raise MissingSeriesError("depth artifact has no boundary points")
    nbars = []
    gammas = []
    for i, point in enumerate(boundary):
        if not isinstance(point, dict):
            raise MissingSeriesError(f"boundary point {i} is not an object")
        nbar = _require(point, "nbar", f"boundary point {i}")
        gamma = _require(point, "gamma", f"boundary point {i}")
        for name, v in (("nbar", nbar), ("gamma", gamma)):
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise MissingSeriesError(
                    f"boundary point {i} field {name} is not numeric"
                )
        nbars.append(float(nbar))
        gammas.append(float(gamma))
    threshold = data.get("threshold")
    if not isinstance(threshold, (int, float)) or isinstance(threshold, bool):
        raise MissingSeriesError("depth artifact is missing its threshold")
    return DepthBoundary(nbars, gammas, float(threshold))


def extract_convergence(data: dict[str, Any]) -> ConvergenceSeries:
    """Pull truncation sizes and gaps from a convergence artifact."""
    rows = _require(data, "rows", "convergence artifact")
    if not isinstance(rows, list) or not rows:
        raise MissingSeriesError("convergence artifact has no rows")
    uppers = []
    gaps = []
    for i, row in enumerate(rows):
        if not isinstance(row, dict):
            raise MissingSeriesError(f"convergence row {i} is not an object")
        upper = _require(row, "upper", f"convergence row {i}")
        gap = _require(row, "gap", f"convergence row {i}")
        if not isinstance(upper, int) or isinstance(upper, bool):
            raise MissingSeriesError(f"convergence row {i} upper is not an integer")
        if not isinstance(gap, (int, float)) or isinstance(gap, bool):
            raise MissingSeriesError(f"convergence row {i} gap is not numeric")
        uppers.append(upper)
        gaps.append(float(gap))
    return ConvergenceSeries(uppers, gaps)
