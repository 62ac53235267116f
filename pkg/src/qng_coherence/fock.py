"""Truncated Fock-space linear algebra and Gaussian unitaries.

Conventions used throughout the package:

* ``a`` is the annihilation operator with ``<k-1|a|k> = sqrt(k)``.
* Displacement ``D(alpha) = exp(alpha a^dag - conj(alpha) a)``.
* Squeezing ``S(xi) = exp(xi a^dag^2 - conj(xi) a^2)``.  Note the generator
  carries no 1/2, so the conventional squeeze amplitude is ``r = 2|xi|``
  and the vacuum overlap is ``1/sqrt(cosh(2|xi|))``.
* A free state is ``S(xi) D(alpha) |psi~>``: displacement acts first.

Two truncation effects are distinguished.  ``dim_work`` is the internal
dimension at which matrix exponentials are evaluated.  Exponentials of the
truncated generators are exactly unitary at any size, so construction
accuracy is instead certified by an edge test: the columns being returned
must carry negligible weight near the top of the working window, because
the generators are banded and a column that never reaches the boundary is
unaffected by it.  ``dim_report`` is the reporting window; population that
leaks past it cannot be represented there at all, whatever ``dim_work``
is, and ``unitarity_defect`` applied to a reporting block measures exactly
that leakage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm


class TruncationError(RuntimeError):
    """Raised when a truncated object fails its norm-accounting guard."""


def _ladder(dim: int) -> np.ndarray:
    """Annihilation matrix of size dim x dim."""
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


@dataclass(frozen=True)
class FockSpace:
    """Pair of Fock-basis truncation dimensions.

    dim_report is the reporting window seen by callers; dim_work is the
    internal dimension used to build Gaussian unitaries accurately.
    """

    dim_report: int
    dim_work: int
    trunc_tol: float = 1e-10

    def __post_init__(self) -> None:
        if self.dim_report < 2:
            raise ValueError("dim_report must be at least 2")
        if self.dim_work < self.dim_report:
            raise ValueError("dim_work must be >= dim_report")
        if not (0 < self.trunc_tol < 1):
            raise ValueError("trunc_tol must be in (0, 1)")

    @classmethod
    def for_params(cls, dim_report: int, xi: complex = 0.0, alpha: complex = 0.0,
                   trunc_tol: float = 1e-10) -> "FockSpace":
        """Space with dim_work from the sizing rule for the given magnitudes."""
        return cls(dim_report, suggested_work_dim(dim_report, xi, alpha), trunc_tol)


def suggested_work_dim(dim_report: int, xi: complex = 0.0, alpha: complex = 0.0) -> int:
    """Working dimension for Gaussian parameters of the given magnitude.

    dim_work = max(4*dim_report, dim_report + ceil(16*(|alpha|^2 + sinh^2(2|xi|)))).
    This is a guard band for the generator truncation; exact adequacy is
    always confirmed against unitarity_defect by the callers that care.
    """
    spread = abs(alpha) ** 2 + math.sinh(2.0 * abs(xi)) ** 2
    return max(4 * dim_report, dim_report + math.ceil(16.0 * spread))


@dataclass(frozen=True)
class GaussianParams:
    """Squeezing xi and displacement alpha of S(xi) D(alpha)."""

    xi: complex = 0.0
    alpha: complex = 0.0


@dataclass
class StateVector:
    """Fock-basis amplitudes.  norm_loss records truncation loss diagnostics."""

    amplitudes: np.ndarray
    norm_loss: float = 0.0

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.ndim != 1:
            raise ValueError("amplitudes must be a vector")

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.amplitudes / n, self.norm_loss)

    def density_matrix(self) -> "DensityMatrix":
        psi = self.normalized().amplitudes
        return DensityMatrix(np.outer(psi, psi.conj()))


@dataclass
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite Fock-basis matrix."""

    elements: np.ndarray

    def __post_init__(self) -> None:
        self.elements = np.asarray(self.elements, dtype=complex)
        if self.elements.ndim != 2 or self.elements.shape[0] != self.elements.shape[1]:
            raise ValueError("elements must be a square matrix")

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    def validate(self, herm_tol: float = 1e-12, trace_tol: float = 1e-10,
                 eig_tol: float = 1e-10) -> None:
        rho = self.elements
        herm = float(np.max(np.abs(rho - rho.conj().T))) if rho.size else 0.0
        if herm > herm_tol:
            raise ValueError(f"not Hermitian: max deviation {herm:.3e}")
        tr = complex(np.trace(rho))
        if abs(tr - 1.0) > trace_tol:
            raise ValueError(f"trace {tr} deviates from 1")
        w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
        if float(w.min()) < -eig_tol:
            raise ValueError(f"negative eigenvalue {w.min():.3e}")


def annihilation_matrix(space: FockSpace) -> np.ndarray:
    """Annihilation operator at the working dimension."""
    return _ladder(space.dim_work)


def unitarity_defect(U: np.ndarray, ncols: int | None = None) -> float:
    """Max over the first ncols columns of |1 - column norm^2|.

    Applied to full working-dimension columns this measures construction
    accuracy; applied to a reporting block it measures how much population
    the block fails to contain.
    """
    U = np.asarray(U)
    if ncols is None:
        ncols = U.shape[1]
    norms = np.einsum("ij,ij->j", U[:, :ncols].conj(), U[:, :ncols]).real
    return float(np.max(np.abs(1.0 - norms)))


def _displacement_full(alpha: complex, dim_work: int) -> np.ndarray:
    a = _ladder(dim_work)
    gen = alpha * a.conj().T - np.conj(alpha) * a
    return expm(gen)


def _squeezing_full(xi: complex, dim_work: int) -> np.ndarray:
    a = _ladder(dim_work)
    a2 = a @ a
    gen = xi * a2.conj().T - np.conj(xi) * a2
    return expm(gen)


def edge_weight(U: np.ndarray, dim_work: int, ncols: int | None = None) -> float:
    """Worst column weight in the top quarter of the working window.

    A column of a banded-generator exponential that carries negligible
    weight near the window edge is insensitive to the truncation boundary,
    so this is the construction-accuracy certificate for that column.
    """
    U = np.asarray(U)
    if ncols is None:
        ncols = U.shape[1]
    band = dim_work - dim_work // 4
    tail = U[band:dim_work, :ncols]
    return float(np.max(np.einsum("ij,ij->j", tail.conj(), tail).real))


def _report_block(U_full: np.ndarray, space: FockSpace, what: str) -> np.ndarray:
    defect = edge_weight(U_full, space.dim_work, space.dim_report)
    if defect > space.trunc_tol:
        raise TruncationError(
            f"{what}: column weight {defect:.3e} at the working-window edge "
            f"exceeds tolerance {space.trunc_tol:.1e}; increase dim_work"
        )
    return U_full[: space.dim_report, : space.dim_report]


def displacement_unitary(alpha: complex, space: FockSpace) -> np.ndarray:
    """D(alpha) truncated to the reporting block, with a norm guard."""
    return _report_block(_displacement_full(alpha, space.dim_work), space,
                         f"displacement_unitary(alpha={alpha})")


def squeezing_unitary(xi: complex, space: FockSpace) -> np.ndarray:
    """S(xi) truncated to the reporting block, with a norm guard."""
    return _report_block(_squeezing_full(xi, space.dim_work), space,
                         f"squeezing_unitary(xi={xi})")


def apply_gaussian(params: GaussianParams, psi: StateVector, space: FockSpace) -> StateVector:
    """S(xi) D(alpha) |psi>, truncated to dim_report and renormalized.

    Displacement acts first.  The pre-renormalization norm loss is recorded
    on the result; loss above the space tolerance raises TruncationError.
    """
    if psi.dim > space.dim_work:
        raise ValueError("state longer than dim_work")
    n0 = psi.norm()
    if abs(n0 - 1.0) > 1e-8:
        raise ValueError("input state must be normalized")
    padded = np.zeros(space.dim_work, dtype=complex)
    padded[: psi.dim] = psi.amplitudes
    out = _displacement_full(params.alpha, space.dim_work) @ padded
    out = _squeezing_full(params.xi, space.dim_work) @ out
    edge = edge_weight(out[:, None], space.dim_work)
    if edge > space.trunc_tol:
        raise TruncationError(
            f"apply_gaussian: evolved state carries weight {edge:.3e} at the "
            f"working-window edge; increase dim_work"
        )
    kept = out[: space.dim_report]
    norm_loss = float(max(0.0, 1.0 - np.vdot(kept, kept).real))
    if norm_loss > space.trunc_tol:
        raise TruncationError(
            f"apply_gaussian: norm loss {norm_loss:.3e} above tolerance "
            f"{space.trunc_tol:.1e}; increase dim_report"
        )
    kept = kept / np.linalg.norm(kept)
    return StateVector(kept, norm_loss=norm_loss)
