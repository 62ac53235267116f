"""Tests for threshold tables, convergence studies, and envelope curves."""

import numpy as np
import pytest

from qng_coherence import (
    CoherenceMeasureId,
    ErrorProb,
    FockFamily,
    FockProb,
    MissingOne,
    NHierarchy,
    SearchConfig,
    SpecError,
    absolute_threshold,
    clear_threshold_cache,
    convergence_study,
    default_lambda_grid,
    physical_boundary,
    probability,
    relative_curve_2d,
    relative_surface_3d,
    threshold_table,
)
from qng_coherence.fock import FockSpace, StateVector, apply_gaussian
from qng_coherence.thresholds import EnvelopeError, _check_surface_convex

SMALL = SearchConfig(dim_report=16, starts=6, seed=7, validation_samples=100)


def state_of(result, cfg):
    """Rebuild the reported maximizer as a normalized state vector.

    A wider window than the search used keeps the rebuild clear of the
    truncation guard; the search itself only ever compresses a few rows.
    """
    space = FockSpace(4 * cfg.dim_report, 16 * cfg.dim_report)
    core = np.zeros(space.dim_report, dtype=complex)
    for j, c in zip(result.subspace.indices, result.coeffs):
        core[j] = c
    return apply_gaussian(result.params, StateVector(core), space)


def test_saturated_family_reports_sentinel():
    rows = threshold_table(CoherenceMeasureId(0, 1), "N", orders=[2], cfg=SMALL)
    assert len(rows) == 1
    assert rows[0].value == 1.0
    assert rows[0].saturated
    assert rows[0].order == 2


def test_threshold_table_validation():
    mid = CoherenceMeasureId(0, 2)
    with pytest.raises(SpecError):
        threshold_table(mid, "bogus", orders=[1])
    with pytest.raises(SpecError):
        threshold_table(mid, "N", orders=[])
    with pytest.raises(SpecError):
        threshold_table(mid, "L")
    rows = threshold_table(mid, "fock", orders=[1, 2, 3], cfg=SMALL)
    assert len(rows) == 1
    assert rows[0].label == "fock"


def test_order_monotonicity_and_fock_equals_first_order():
    mid = CoherenceMeasureId(0, 3)
    rows = threshold_table(mid, "N", orders=[1, 2, 3], cfg=SMALL)
    values = [r.value for r in rows]
    assert values == sorted(values)
    fock = threshold_table(mid, "fock", cfg=SMALL)[0]
    # first hierarchy order adds only the span {0}, itself a singleton
    assert abs(rows[0].value - fock.value) < 1e-6
    assert not rows[-1].saturated


def test_convergence_preconditions():
    mid = CoherenceMeasureId(0, 3)
    with pytest.raises(SpecError):
        convergence_study(mid, [5], excluded=1, cfg=SMALL)
    with pytest.raises(SpecError):
        convergence_study(mid, [SMALL.dim_report], excluded=0, cfg=SMALL)


def test_convergence_rows_monotone():
    mid = CoherenceMeasureId(0, 3)
    rows = convergence_study(mid, [4, 6, 8], excluded=0, cfg=SMALL)
    assert [r.upper for r in rows] == [4, 6, 8]
    for row in rows:
        assert row.excluded == 0
        assert abs(row.gap - (1.0 - row.value)) < 1e-15
    values = [r.value for r in rows]
    assert values == sorted(values)
    assert all(0.0 < v < 1.0 for v in values)


def test_convergence_spans_grow_toward_the_bound():
    mid = CoherenceMeasureId(0, 1)
    rows = convergence_study(mid, [3, 6, 10], excluded=0, cfg=SMALL)
    assert rows[-1].gap < rows[0].gap
    assert rows[-1].gap < 0.05


def test_physical_boundary_number_closed_form():
    mid = CoherenceMeasureId(0, 1)
    probs = [0.05, 0.2, 0.5, 0.8]
    curve = physical_boundary(mid, FockProb(1), probs, SMALL)
    for p, v in zip(curve.probs, curve.values):
        assert abs(v - 2.0 * np.sqrt(p * (1.0 - p))) < 1e-5
    assert curve.kind == "physical"


def test_physical_boundary_error_closed_form():
    mid = CoherenceMeasureId(0, 1)
    probs = [0.0, 0.1, 0.35, 0.6]
    curve = physical_boundary(mid, ErrorProb(1), probs, SMALL)
    for p, v in zip(curve.probs, curve.values):
        assert abs(v - (1.0 - p)) < 1e-6


def test_physical_boundary_window_guard():
    with pytest.raises(ValueError):
        physical_boundary(CoherenceMeasureId(0, 20), FockProb(1), [0.5], SMALL)
    with pytest.raises(ValueError):
        physical_boundary(CoherenceMeasureId(0, 1), FockProb(1), [1.5], SMALL)


def test_relative_curve_properties():
    clear_threshold_cache()
    mid = CoherenceMeasureId(0, 1)
    spec = FockFamily()
    cfg = SearchConfig(dim_report=12, starts=4, seed=7, validation_samples=50)
    absolute = absolute_threshold(mid, spec, cfg)
    p_star = probability(state_of(absolute, cfg).density_matrix(),
                         FockProb(1))
    probs = sorted({0.1, 0.3, 0.5, 0.7, 0.9, round(p_star, 6)})
    grid = default_lambda_grid(per_sign=9, lo=1e-2, hi=1e2)
    curve = relative_curve_2d(mid, spec, FockProb(1), probs, cfg,
                              lambda_grid=grid, refine_tol=3e-4)
    phys = physical_boundary(mid, FockProb(1), probs, cfg)
    values = dict(zip(curve.probs, curve.values))
    for p, v in values.items():
        assert 0.0 <= v <= 1.0
        assert v <= absolute.value + 1e-4
    for p, v, b in zip(curve.probs, curve.values, phys.values):
        assert v <= b + 1e-4
    # conditioning on the maximizer's own probability costs nothing
    assert abs(values[round(p_star, 6)] - absolute.value) < 2e-3
    # the envelope is concave in the probability
    ps = list(curve.probs)
    vs = list(curve.values)
    for i in range(1, len(ps) - 1):
        t = (ps[i] - ps[i - 1]) / (ps[i + 1] - ps[i - 1])
        chord = (1.0 - t) * vs[i - 1] + t * vs[i + 1]
        assert vs[i] >= chord - 1e-6


def test_surface_slice_below_matched_curve():
    clear_threshold_cache()
    mid = CoherenceMeasureId(0, 2)
    spec = MissingOne(4, 2)
    cfg = SearchConfig(dim_report=10, starts=4, seed=7, validation_samples=50)
    grid = [-30.0, -3.0, -0.3, 0.0, 0.3, 3.0, 30.0]
    surf = relative_surface_3d(mid, spec, FockProb(2), ErrorProb(2),
                               [0.3], [0.02], cfg,
                               grid_number=grid, grid_error=grid)
    curve = relative_curve_2d(mid, spec, FockProb(2), [0.3], cfg,
                              lambda_grid=grid, refine_tol=1e9)
    assert surf.values[0][0] <= curve.values[0] + 1e-6
    assert surf.probs_number == (0.3,)
    assert surf.probs_error == (0.02,)
    assert surf.top_gap[0][0] == np.inf
    assert surf.crossing[0][0] is False or surf.crossing[0][0] == False  # noqa: E712
    d = surf.to_dict()
    assert d["values"][0][0] == surf.values[0][0]


def test_surface_rejects_bad_probabilities():
    mid = CoherenceMeasureId(0, 2)
    with pytest.raises(ValueError):
        relative_surface_3d(mid, MissingOne(4, 2), FockProb(2), ErrorProb(2),
                            [1.2], [0.0], SMALL,
                            grid_number=[-1.0, 0.0, 1.0],
                            grid_error=[-1.0, 0.0, 1.0])


def test_surface_convexity_guard():
    lams = np.array([-1.0, 0.0, 1.0])
    ftab = np.zeros((3, 3, 1))
    ftab[1, :, 0] = 1.0  # concave bump along axis 0
    with pytest.raises(EnvelopeError):
        _check_surface_convex(lams, lams, ftab)


def test_default_lambda_grid_shape():
    grid = default_lambda_grid(per_sign=5, lo=0.1, hi=10.0)
    assert len(grid) == 11
    assert 0.0 in grid
    assert np.allclose(grid, -grid[::-1])
    with pytest.raises(ValueError):
        default_lambda_grid(per_sign=1)
    with pytest.raises(ValueError):
        default_lambda_grid(lo=5.0, hi=1.0)


def test_threshold_cache_roundtrip():
    clear_threshold_cache()
    mid = CoherenceMeasureId(0, 2)
    first = absolute_threshold(mid, FockFamily(), SMALL)
    again = absolute_threshold(mid, FockFamily(), SMALL)
    assert again is first
    clear_threshold_cache()
    fresh = absolute_threshold(mid, FockFamily(), SMALL)
    assert fresh is not first
    assert fresh.value == first.value
