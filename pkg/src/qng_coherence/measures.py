"""Fock-basis coherence measures and probability observables.

The coherence measure of a pair (m, n) with m < n is
``C_{m,n}(rho) = 2 |<m|rho|n>|``.  A phase scan evaluates the witness
``X(phi) = exp(i phi)|m><n| + h.c.`` on a uniform phase grid; the scan
estimator ``(max - min)/2`` recovers the coherence up to a grid bound of
``2|rho_mn| (1 - cos(pi/G))`` for G phases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import DensityMatrix


class GridError(ValueError):
    """Raised for phase grids that are too coarse or not uniform."""


@dataclass(frozen=True)
class CoherenceMeasureId:
    """Fock index pair (m, n), m < n.  The order of the measure is n - m."""

    m: int
    n: int

    def __post_init__(self) -> None:
        if self.m < 0 or self.n < 0:
            raise ValueError("Fock indices must be nonnegative")
        if self.m >= self.n:
            raise ValueError("measure requires m < n")

    @property
    def order(self) -> int:
        return self.n - self.m


@dataclass(frozen=True)
class FockProb:
    """Observable P_k = <k|rho|k>."""

    k: int

    def __post_init__(self) -> None:
        if self.k < 0:
            raise ValueError("Fock index must be nonnegative")


@dataclass(frozen=True)
class ErrorProb:
    """Observable P_{e,n} = 1 - sum_{k<=n} P_k."""

    n: int

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("Fock index must be nonnegative")


ProbObservable = FockProb | ErrorProb


@dataclass(frozen=True)
class PhaseScan:
    """Witness expectation values on a phase grid."""

    phases: tuple[float, ...]
    values: tuple[float, ...]


def coherence_element(rho: DensityMatrix, mid: CoherenceMeasureId) -> float:
    """C_{m,n}(rho) = 2 |<m|rho|n>|."""
    if mid.n >= rho.dim:
        raise ValueError(f"measure index {mid.n} outside dimension {rho.dim}")
    return 2.0 * float(abs(rho.elements[mid.m, mid.n]))


def phase_scan(rho: DensityMatrix, mid: CoherenceMeasureId, phases: np.ndarray) -> PhaseScan:
    """Expectation of X(phi) over the given phases.

    Tr[rho X(phi)] = 2 Re(exp(-i phi) rho_mn); invariant under a global
    phase rotation of rho's basis combined with the matching phi shift.
    """
    if mid.n >= rho.dim:
        raise ValueError(f"measure index {mid.n} outside dimension {rho.dim}")
    phases = np.asarray(phases, dtype=float)
    el = complex(rho.elements[mid.m, mid.n])
    vals = 2.0 * (np.exp(-1j * phases) * el).real
    return PhaseScan(tuple(float(p) for p in phases),
                     tuple(float(v) for v in vals))


def coherence_from_scan(scan: PhaseScan) -> float:
    """(max - min)/2 of a uniform scan of at least 8 phases."""
    phases = np.asarray(scan.phases, dtype=float)
    if phases.size < 8:
        raise GridError(f"need at least 8 phases, got {phases.size}")
    diffs = np.diff(phases)
    if diffs.size and (np.any(diffs <= 0) or
                       np.max(np.abs(diffs - diffs[0])) > 1e-9 * max(1.0, abs(diffs[0]))):
        raise GridError("phase grid must be uniformly spaced and increasing")
    span = phases[-1] - phases[0] + (diffs[0] if diffs.size else 0.0)
    if abs(span - 2.0 * math.pi) > 1e-6:
        raise GridError("phase grid must cover [0, 2pi)")
    vals = np.asarray(scan.values, dtype=float)
    return float((vals.max() - vals.min()) / 2.0)


def uniform_phases(count: int) -> np.ndarray:
    """count phases uniformly spaced over [0, 2pi)."""
    return np.linspace(0.0, 2.0 * math.pi, count, endpoint=False)


def scan_error_bound(coherence: float, count: int) -> float:
    """Worst-case scan-estimator error for a uniform grid of `count` phases."""
    return coherence * (1.0 - math.cos(math.pi / count))


def probability(rho: DensityMatrix, obs: ProbObservable) -> float:
    """Evaluate a probability observable on rho."""
    diag = np.diag(rho.elements).real
    if isinstance(obs, FockProb):
        if obs.k >= rho.dim:
            raise ValueError(f"Fock index {obs.k} outside dimension {rho.dim}")
        return float(diag[obs.k])
    if obs.n >= rho.dim:
        raise ValueError(f"Fock index {obs.n} outside dimension {rho.dim}")
    return float(1.0 - np.sum(diag[: obs.n + 1]))


def observable_projector(obs: ProbObservable, dim: int) -> np.ndarray:
    """Projector whose expectation value is the observable."""
    P = np.zeros((dim, dim), dtype=complex)
    if isinstance(obs, FockProb):
        P[obs.k, obs.k] = 1.0
    else:
        np.fill_diagonal(P, 1.0)
        for k in range(min(obs.n + 1, dim)):
            P[k, k] = 0.0
    return P
