"""Core-state families for the certification hierarchies.

A core state of order k leaves every coherence measure of order >= k at
zero.  Families are described by lists of Fock-index subspaces; any unit
vector supported on a listed subspace is an admissible core state.

Families:

* GaussianVacuum: just {0}.
* FockFamily: every single Fock state.
* Stellar(n): the single span {0..n-1} for a measure pair (m, n).
* NHierarchy(k): span {0..k-1} plus every single Fock state.
* LHierarchy(r): every window of r consecutive indices.
* MissingOne(upper, excluded): {0..upper} with one index removed.

A family saturates a measure (its threshold is the trivial 1) exactly
when some listed subspace contains both indices of the pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import FockSpace
from .measures import CoherenceMeasureId


class SpecError(ValueError):
    """Raised for hierarchy specs that do not fit the reporting window."""


@dataclass(frozen=True)
class GaussianVacuum:
    pass


@dataclass(frozen=True)
class FockFamily:
    pass


@dataclass(frozen=True)
class Stellar:
    pass


@dataclass(frozen=True)
class NHierarchy:
    order: int

    def __post_init__(self) -> None:
        if self.order < 1:
            raise SpecError("hierarchy order must be >= 1")


@dataclass(frozen=True)
class LHierarchy:
    order: int

    def __post_init__(self) -> None:
        if self.order < 1:
            raise SpecError("hierarchy order must be >= 1")


@dataclass(frozen=True)
class MissingOne:
    upper: int
    excluded: int

    def __post_init__(self) -> None:
        if self.upper < 1:
            raise SpecError("upper index must be >= 1")
        if not (0 <= self.excluded <= self.upper):
            raise SpecError("excluded index must lie in 0..upper")


HierarchySpec = GaussianVacuum | FockFamily | Stellar | NHierarchy | LHierarchy | MissingOne


@dataclass(frozen=True)
class CoreSubspace:
    """Sorted tuple of Fock indices spanning one admissible subspace."""

    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.indices:
            raise ValueError("subspace cannot be empty")
        if list(self.indices) != sorted(set(self.indices)):
            raise ValueError("indices must be strictly increasing")
        if self.indices[0] < 0:
            raise ValueError("indices must be nonnegative")

    @property
    def size(self) -> int:
        return len(self.indices)


def spec_label(spec: HierarchySpec) -> str:
    if isinstance(spec, GaussianVacuum):
        return "gauss"
    if isinstance(spec, FockFamily):
        return "fock"
    if isinstance(spec, Stellar):
        return "stellar"
    if isinstance(spec, NHierarchy):
        return f"N{spec.order}"
    if isinstance(spec, LHierarchy):
        return f"L{spec.order}"
    return f"missing({spec.upper},{spec.excluded})"


def core_subspaces(spec: HierarchySpec, mid: CoherenceMeasureId,
                   space: FockSpace) -> list[CoreSubspace]:
    """Enumerate the family's subspaces, span-first / ascending start."""
    dim = space.dim_report
    if isinstance(spec, GaussianVacuum):
        return [CoreSubspace((0,))]
    if isinstance(spec, FockFamily):
        return [CoreSubspace((j,)) for j in range(dim)]
    if isinstance(spec, Stellar):
        if mid.n > dim:
            raise SpecError(f"stellar span 0..{mid.n - 1} exceeds dim_report {dim}")
        return [CoreSubspace(tuple(range(mid.n)))]
    if isinstance(spec, NHierarchy):
        if spec.order > dim:
            raise SpecError(f"order {spec.order} exceeds dim_report {dim}")
        subs = [CoreSubspace(tuple(range(spec.order)))]
        subs.extend(CoreSubspace((j,)) for j in range(dim))
        return subs
    if isinstance(spec, LHierarchy):
        if spec.order > dim:
            raise SpecError(f"order {spec.order} exceeds dim_report {dim}")
        r = spec.order
        return [CoreSubspace(tuple(range(s, s + r))) for s in range(dim - r + 1)]
    if spec.upper >= dim:
        raise SpecError(f"upper index {spec.upper} exceeds dim_report {dim}")
    idx = tuple(j for j in range(spec.upper + 1) if j != spec.excluded)
    return [CoreSubspace(idx)]


def family_saturates(spec: HierarchySpec, mid: CoherenceMeasureId) -> bool:
    """True when some subspace of the family holds both measure indices.

    Those families contain the target superposition itself, so their
    threshold is the trivial sentinel 1 and certification is impossible:
    the N-hierarchy saturates for order > n, the L-hierarchy for window
    width > n - m, and MissingOne when neither index is the excluded one.
    """
    if isinstance(spec, (GaussianVacuum, FockFamily)):
        return False
    if isinstance(spec, Stellar):
        return False
    if isinstance(spec, NHierarchy):
        return spec.order - 1 >= mid.n
    if isinstance(spec, LHierarchy):
        return spec.order > mid.order
    return not (spec.excluded in (mid.m, mid.n)) and mid.n <= spec.upper


def measures_of_order(spec: HierarchySpec, order: int, dim: int) -> list[CoherenceMeasureId]:
    """Measures a core state of the given hierarchy must zero at this order.

    N-style hierarchies reject {C_{m,K}: m < K} at order K; the L-hierarchy
    rejects {C_{k,k+L}: all k} at order L.
    """
    if isinstance(spec, LHierarchy):
        return [CoherenceMeasureId(k, k + order) for k in range(dim - order)]
    return [CoherenceMeasureId(m, order) for m in range(order)] if order < dim else []


def claimed_zero_measures(spec: HierarchySpec, mid: CoherenceMeasureId,
                          dim: int) -> list[CoherenceMeasureId]:
    """The coherence measures that must vanish on every state of the family."""
    if isinstance(spec, (GaussianVacuum, FockFamily)):
        return [CoherenceMeasureId(i, j) for j in range(dim) for i in range(j)]
    if isinstance(spec, Stellar):
        return [CoherenceMeasureId(m, mid.n) for m in range(mid.n)]
    if isinstance(spec, NHierarchy):
        out = []
        for order in range(spec.order, dim):
            out.extend(measures_of_order(spec, order, dim))
        return out
    if isinstance(spec, LHierarchy):
        out = []
        for order in range(spec.order, dim):
            out.extend(measures_of_order(spec, order, dim))
        return out
    ex = spec.excluded
    return ([CoherenceMeasureId(i, ex) for i in range(ex)]
            + [CoherenceMeasureId(ex, j) for j in range(ex + 1, dim)])


def verify_core_property(spec: HierarchySpec, mid: CoherenceMeasureId,
                         samples: int, seed: int, space: FockSpace,
                         tol: float = 1e-12) -> bool:
    """Sample random core states and check the defining zeros numerically."""
    dim = space.dim_report
    subs = core_subspaces(spec, mid, space)
    zeros = claimed_zero_measures(spec, mid, dim)
    rows = np.array([z.m for z in zeros])
    cols = np.array([z.n for z in zeros])
    rng = np.random.default_rng(seed)
    per_sub = max(1, samples // len(subs))
    for sub in subs:
        idx = np.array(sub.indices)
        for _ in range(per_sub):
            c = rng.normal(size=idx.size) + 1j * rng.normal(size=idx.size)
            c /= np.linalg.norm(c)
            psi = np.zeros(dim, dtype=complex)
            psi[idx] = c
            vals = 2.0 * np.abs(psi[rows] * psi[cols].conj())
            if vals.size and float(vals.max()) > tol:
                return False
    return True
