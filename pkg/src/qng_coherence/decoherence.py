"""Robustness of certified coherence under loss and thermal noise.

The perturbed-state model adds, to first order, a loss branch and a
symmetric thermal bracket:

    rho' ~ rho + gamma a rho a^dag
               + nbar (a rho a^dag + a^dag rho a - {n_hat + 1/2, rho}),

normalized by its trace.  The thermal bracket is traceless, so the trace
is 1 + gamma <n_hat>.  The model is a first-order expansion: it is
trusted for gamma <= 0.3 and nbar <= 0.15, and use outside that box
requires an explicit override.  Small negative eigenvalues produced by
the expansion are clipped before renormalization.

For the ideal two-level superposition (|m> + |n>)/sqrt(2) the model gives

    C(gamma, nbar) = (1 - nbar (m + n + 1)) / (1 + gamma (m + n) / 2),

which yields closed-form noise depths; general states go through a coarse
scan plus bisection.  An exact thermal attenuator channel (a quantum-limited
amplifier composed with a pure-loss channel) is provided to quantify what
the first-order model misses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import DensityMatrix, TruncationError
from .measures import CoherenceMeasureId, coherence_element

GAMMA_VALID = 0.3
NBAR_VALID = 0.15


class ModelValidityError(ValueError):
    """Noise weights outside the trusted first-order domain."""


class NoDepthError(RuntimeError):
    """The threshold is at or above the kinematic bound."""


def _as_matrix(rho) -> np.ndarray:
    mat = np.asarray(getattr(rho, "elements", rho), dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("state must be a square matrix")
    return mat


@dataclass(frozen=True)
class NoisyStateModel:
    """First-order perturbation of the superposition (|m> + |n>)/sqrt(2).

    The loss branch is weighted by the loss probability gamma = 1 - eta;
    setting weight_loss_by_transmission uses the transmission 1 - gamma
    instead.  That alternative convention is kept selectable for
    comparison, but everything in this package uses the default, which is
    the only reading with the correct noiseless limit.
    """

    mid: CoherenceMeasureId
    gamma: float = 0.0
    nbar: float = 0.0
    allow_extrapolation: bool = False
    weight_loss_by_transmission: bool = False

    def __post_init__(self):
        if self.gamma < 0.0 or self.nbar < 0.0:
            raise ModelValidityError("noise weights must be nonnegative")

    def validate(self) -> None:
        if self.allow_extrapolation:
            return
        if self.gamma > GAMMA_VALID or self.nbar > NBAR_VALID:
            raise ModelValidityError(
                f"weights gamma={self.gamma}, nbar={self.nbar} exceed the "
                f"trusted domain gamma<={GAMMA_VALID}, nbar<={NBAR_VALID}")

    @property
    def loss_weight(self) -> float:
        if self.weight_loss_by_transmission:
            return 1.0 - self.gamma
        return self.gamma

    def apply(self, rho) -> DensityMatrix:
        """Perturb an arbitrary state with this model's weights."""
        self.validate()
        return _perturb(_as_matrix(rho), self.loss_weight, self.nbar)

    def ideal_coherence(self) -> float:
        """Model coherence of the ideal superposition, in closed form."""
        num = 1.0 - self.nbar * (self.mid.m + self.mid.n + 1)
        den = 1.0 + 0.5 * self.loss_weight * (self.mid.m + self.mid.n)
        return max(num, 0.0) / den


def _perturb(mat: np.ndarray, loss_weight: float, nbar: float) -> DensityMatrix:
    dim = mat.shape[0]
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)
    ad = a.conj().T
    out = mat.copy()
    if loss_weight != 0.0:
        out += loss_weight * (a @ mat @ ad)
    if nbar != 0.0:
        nhat = np.diag(np.arange(dim, dtype=float) + 0.5).astype(complex)
        out += nbar * (a @ mat @ ad + ad @ mat @ a - nhat @ mat - mat @ nhat)
    out = 0.5 * (out + out.conj().T)
    w, v = np.linalg.eigh(out)
    w = np.clip(w, 0.0, None)
    total = float(np.sum(w))
    if total <= 0.0:
        raise ModelValidityError("perturbation annihilated the state")
    out = (v * (w / total)) @ v.conj().T
    return DensityMatrix(out)


def perturbed_state(model: NoisyStateModel, dim: int | None = None,
                    rho0=None) -> DensityMatrix:
    """Noisy density matrix of the model's target superposition.

    An explicit rho0 replaces the ideal superposition.  Operators are
    truncated to the state's own window, so the top Fock level of a state
    fed to the thermal bracket should be empty; ideal_target leaves that
    headroom by default.
    """
    model.validate()
    if rho0 is None:
        rho0 = ideal_target(model.mid, dim)
    return _perturb(_as_matrix(rho0), model.loss_weight, model.nbar)


def ideal_target(mid: CoherenceMeasureId, dim: int | None = None) -> DensityMatrix:
    """Density matrix of (|m> + |n>)/sqrt(2) with thermal-bracket headroom."""
    if dim is None:
        dim = mid.n + 2
    if dim <= mid.n:
        raise ValueError("dimension must exceed the upper measure index")
    psi = np.zeros(dim, dtype=complex)
    psi[mid.m] = 1.0 / math.sqrt(2.0)
    psi[mid.n] = 1.0 / math.sqrt(2.0)
    return DensityMatrix(np.outer(psi, psi.conj()))


# ---------------------------------------------------------------------------
# Exact reference channel


def exact_channel(rho, eta: float, nbar_env: float, *, pad: int = 16) -> DensityMatrix:
    """Thermal attenuator: transmission eta into a bath with mean nbar_env.

    Realized as a quantum-limited amplifier of gain G = 1 + (1-eta) nbar_env
    after a pure-loss channel of transmission eta/G, which reproduces the
    exact input-output moments of the thermal channel.  Kraus terms are
    summed until the residual weight drops below 1e-14.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError("transmission must lie in (0, 1]")
    if nbar_env < 0.0:
        raise ValueError("bath occupation must be nonnegative")
    mat = _as_matrix(rho)
    dim = mat.shape[0]
    dw = dim + pad
    big = np.zeros((dw, dw), dtype=complex)
    big[:dim, :dim] = mat

    gain = 1.0 + (1.0 - eta) * nbar_env
    eta0 = eta / gain

    a = np.diag(np.sqrt(np.arange(1, dw, dtype=float)), 1).astype(complex)
    levels = np.arange(dw, dtype=float)

    # Pure loss of transmission eta0.  The Kraus series is finite on a
    # truncated window (a^k vanishes for k >= dw), so it is summed exactly.
    half = np.power(eta0, 0.5 * levels)
    ak = np.eye(dw, dtype=complex)
    out = np.zeros_like(big)
    coef = 1.0
    for k in range(dw):
        if k > 0:
            ak = a @ ak
            coef *= (1.0 - eta0) / k
        kraus = half[:, None] * ak
        out += coef * (kraus @ big @ kraus.conj().T)
        if not np.any(ak):
            break

    # Quantum-limited amplifier of gain G.
    if gain > 1.0:
        t = math.sqrt((gain - 1.0) / gain)
        sech_pow = np.power(gain, -0.5 * (levels + 1.0))
        adj = a.conj().T
        amp = np.zeros_like(out)
        aj = np.eye(dw, dtype=complex)
        coef = 1.0
        for j in range(pad + 1):
            if j > 0:
                aj = adj @ aj
                coef *= (t * t) / j
            kraus = aj * sech_pow[None, :]
            term = coef * (kraus @ out @ kraus.conj().T)
            amp += term
            if j > 0 and float(np.trace(term).real) < 1e-14:
                break
        out = amp

    kept = out[:dim, :dim]
    kept = 0.5 * (kept + kept.conj().T)
    loss = abs(1.0 - float(np.trace(kept).real))
    if loss > 1e-6:
        raise TruncationError(
            f"channel output lost weight {loss:.3e}; enlarge the state window")
    return DensityMatrix(kept / np.trace(kept).real)


# ---------------------------------------------------------------------------
# Noise depths


@dataclass(frozen=True)
class DepthResult:
    value: float
    threshold: float
    kind: str
    saturated: bool
    validity_exceeded: bool
    iterations: int
    bracket: float

    def to_dict(self) -> dict:
        return {"value": self.value, "threshold": self.threshold,
                "kind": self.kind, "saturated": self.saturated,
                "validity_exceeded": self.validity_exceeded,
                "iterations": self.iterations, "bracket": self.bracket}


@dataclass(frozen=True)
class DepthPoint:
    nbar: float
    gamma: float
    saturated: bool

    def to_dict(self) -> dict:
        return {"nbar": self.nbar, "gamma": self.gamma,
                "saturated": self.saturated}


def _check_threshold(threshold: float) -> None:
    if threshold >= 1.0 - 1e-12:
        raise NoDepthError(
            "threshold sits at the kinematic bound; no noise is tolerated")
    if threshold <= 0.0:
        raise ValueError("threshold must be positive")


def _model_coherence(rho0: np.ndarray, mid: CoherenceMeasureId,
                     gamma: float, nbar: float) -> float:
    out = _perturb(rho0, gamma, nbar)
    return coherence_element(out, mid)


def _first_crossing(f, cap: float, tol: float, coarse: int = 64
                    ) -> tuple[float | None, int]:
    """Smallest root of f on (0, cap]; f(0) is assumed positive."""
    xs = np.linspace(0.0, cap, coarse + 1)
    it = 0
    lo = None
    for i in range(1, len(xs)):
        it += 1
        if f(xs[i]) <= 0.0:
            lo, hi = xs[i - 1], xs[i]
            break
    else:
        return None, it
    while hi - lo > tol:
        it += 1
        mid_x = 0.5 * (lo + hi)
        if f(mid_x) <= 0.0:
            hi = mid_x
        else:
            lo = mid_x
    return 0.5 * (lo + hi), it


def loss_depth(mid: CoherenceMeasureId, threshold: float, *, nbar: float = 0.0,
               rho0=None, tol: float = 1e-6) -> DepthResult:
    """Largest loss weight keeping the model coherence at the threshold."""
    _check_threshold(threshold)
    cap = 1.0
    bracket = 0.0
    if rho0 is None:
        num = 1.0 - nbar * (mid.m + mid.n + 1)
        if num <= threshold:
            value, saturated, it = 0.0, False, 0
        else:
            raw = 2.0 * (num / threshold - 1.0) / (mid.m + mid.n)
            saturated = raw >= cap
            value = min(raw, cap)
            it = 0
    else:
        mat = _as_matrix(rho0)
        if _model_coherence(mat, mid, 0.0, nbar) < threshold:
            value, saturated, it = 0.0, False, 0
        else:
            root, it = _first_crossing(
                lambda g: _model_coherence(mat, mid, g, nbar) - threshold,
                cap, tol)
            saturated = root is None
            value = cap if root is None else root
            bracket = 0.0 if root is None else tol
    return DepthResult(value, threshold, "loss", saturated,
                       value > GAMMA_VALID, it, bracket)


def thermal_depth(mid: CoherenceMeasureId, threshold: float, *,
                  gamma: float = 0.0, rho0=None, tol: float = 1e-6) -> DepthResult:
    """Largest thermal weight keeping the model coherence at the threshold."""
    _check_threshold(threshold)
    cap = 1.0
    bracket = 0.0
    if rho0 is None:
        den = 1.0 + 0.5 * gamma * (mid.m + mid.n)
        raw = (1.0 - threshold * den) / (mid.m + mid.n + 1)
        if raw <= 0.0:
            value, saturated, it = 0.0, False, 0
        else:
            saturated = raw >= cap
            value = min(raw, cap)
            it = 0
    else:
        mat = _as_matrix(rho0)
        if _model_coherence(mat, mid, gamma, 0.0) < threshold:
            value, saturated, it = 0.0, False, 0
        else:
            root, it = _first_crossing(
                lambda nb: _model_coherence(mat, mid, gamma, nb) - threshold,
                cap, tol)
            saturated = root is None
            value = cap if root is None else root
            bracket = 0.0 if root is None else tol
    return DepthResult(value, threshold, "thermal", saturated,
                       value > NBAR_VALID, it, bracket)


def depth_boundary(mid: CoherenceMeasureId, threshold: float, nbars=None, *,
                   rho0=None, tol: float = 1e-6) -> list[DepthPoint]:
    """Tolerable loss weight as a function of the thermal weight.

    Sweeps nbar and solves for the loss depth at each point; the curve is
    nonincreasing because thermal noise consumes the same margin.  Points
    past the pure-thermal depth report zero loss.
    """
    _check_threshold(threshold)
    if nbars is None:
        nmax = thermal_depth(mid, threshold, rho0=rho0, tol=tol).value
        nbars = np.linspace(0.0, nmax, 21)
    points = []
    for nb in nbars:
        nb = float(nb)
        if nb < 0.0:
            raise ValueError("thermal weights must be nonnegative")
        res = loss_depth(mid, threshold, nbar=nb, rho0=rho0, tol=tol)
        points.append(DepthPoint(nb, res.value, res.saturated))
    return points
