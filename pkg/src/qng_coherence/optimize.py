"""Maximization of coherence objectives over Gaussian-evolved core states.

For fixed Gaussian parameters U = S(xi) D(alpha) and a core subspace V the
objective is an eigenvalue problem for the compressed operator

    P_V U^dag [ X_{m,n}(phi) + sum_i lambda_i Pi_i ] U P_V,

where X_{m,n}(phi) = exp(i phi)|m><n| + h.c. and Pi_i are probability
projectors.  Only a handful of rows of U^dag are ever needed, so the
propagators are applied through cached eigendecompositions of the fixed
generators a^dag - a and a^dag^2 - a^2 instead of re-exponentiating per
evaluation; the two routes agree to the tolerance of the matrix
exponential itself and the equality is covered by tests.

Without lambda weights the phase-optimal top eigenvalue has the closed
form ||a|| ||b|| + |<a|b>| with a = P_V U^dag |m>, b = P_V U^dag |n>.
With weights the phase is maximized on a grid followed by golden-section
refinement.

The outer search is multi-start Nelder-Mead over real (xi, alpha); sign
freedom of the real parameters realizes the two phase branches of the
conjectured optima.  The search is validated against random fully complex
(xi, alpha, phi) samples; a sample beating the real search beyond
tolerance triggers a complex-parameter recomputation.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .fock import FockSpace, GaussianParams, TruncationError, suggested_work_dim
from .measures import CoherenceMeasureId, ErrorProb, FockProb, ProbObservable
from .cores import CoreSubspace, HierarchySpec, core_subspaces, spec_label


class ValidationError(RuntimeError):
    """Complex-parameter sampling beat the search maximum beyond tolerance."""


@dataclass(frozen=True)
class ObjectiveSpec:
    """Coherence measure plus optional lambda-weighted probability terms."""

    mid: CoherenceMeasureId
    lambda_terms: tuple[tuple[ProbObservable, float], ...] = ()

    def lambda_total(self) -> float:
        return sum(abs(w) for _, w in self.lambda_terms)


@dataclass(frozen=True)
class SearchConfig:
    starts: int = 24
    seed: int = 7
    xi_max: float = 1.0
    alpha_max: float = 3.0
    phi_grid: int = 64
    phi_tol: float = 1e-10
    local_tol: float = 1e-9
    validation_samples: int = 2000
    dim_report: int = 40
    trunc_tol: float = 1e-10
    workers: int = 1
    strict_sweep: bool = False
    tail_patience: int = 5
    nm_maxiter: int = 500

    def space(self) -> FockSpace:
        return FockSpace(self.dim_report, 4 * self.dim_report, self.trunc_tol)


@dataclass(frozen=True)
class SearchDiagnostics:
    starts: int
    best_start: int
    subspaces_total: int
    subspaces_evaluated: int
    early_stopped: bool
    top5_spread: float
    validation_margin: float
    complex_search: bool
    n_evals: int
    work_dim_max: int
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class ThresholdResult:
    value: float
    params: GaussianParams
    phi: float
    subspace: CoreSubspace
    coeffs: tuple[complex, ...]
    diagnostics: SearchDiagnostics

    def to_dict(self) -> dict:
        d = self.diagnostics
        return {
            "value": self.value,
            "xi": [self.params.xi.real, self.params.xi.imag],
            "alpha": [self.params.alpha.real, self.params.alpha.imag],
            "phi": self.phi,
            "subspace": list(self.subspace.indices),
            "coeffs": [[c.real, c.imag] for c in self.coeffs],
            "diagnostics": {
                "starts": d.starts,
                "best_start": d.best_start,
                "subspaces_total": d.subspaces_total,
                "subspaces_evaluated": d.subspaces_evaluated,
                "early_stopped": d.early_stopped,
                "top5_spread": d.top5_spread,
                "validation_margin": d.validation_margin,
                "complex_search": d.complex_search,
                "n_evals": d.n_evals,
                "work_dim_max": d.work_dim_max,
                "warnings": list(d.warnings),
            },
        }


# ---------------------------------------------------------------------------
# Cached propagators


class _Propagator:
    """Eigendecompositions of the displacement and squeeze generators."""

    def __init__(self, dim: int):
        self.dim = dim
        a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)
        hd = 1j * (a.conj().T - a)
        self.wd, self.Vd = np.linalg.eigh(hd)
        a2 = a @ a
        hs = 1j * (a2.conj().T - a2)
        self.ws, self.Vs = np.linalg.eigh(hs)
        self.VdH = self.Vd.conj().T
        self.VsH = self.Vs.conj().T
        self.Q = self.VdH @ self.Vs

    def inverse_rows(self, xi: complex, alpha: complex, rows: np.ndarray) -> np.ndarray:
        """Columns U^dag e_j for j in rows, U = S(xi) D(alpha); shape (dim, len(rows))."""
        if xi.imag == 0.0 and alpha.imag == 0.0:
            x = self.VsH[:, rows] * np.exp(1j * xi.real * self.ws)[:, None]
            x = self.Q @ x
            x *= np.exp(1j * alpha.real * self.wd)[:, None]
            return self.Vd @ x
        rs, ths = abs(xi), np.angle(xi) if xi != 0 else 0.0
        ra, tha = abs(alpha), np.angle(alpha) if alpha != 0 else 0.0
        k = np.arange(self.dim)
        x = self.VsH[:, rows] * np.exp(-0.5j * ths * rows)[None, :]
        x *= np.exp(1j * rs * self.ws)[:, None]
        x = self.Vs @ x
        x *= np.exp(1j * (0.5 * ths - tha) * k)[:, None]
        x = self.VdH @ x
        x *= np.exp(1j * ra * self.wd)[:, None]
        x = self.Vd @ x
        x *= np.exp(1j * tha * k)[:, None]
        return x


_PROPAGATORS: dict[int, _Propagator] = {}
_PROP_LOCK = threading.Lock()


def _get_propagator(dim: int) -> _Propagator:
    prop = _PROPAGATORS.get(dim)
    if prop is None:
        with _PROP_LOCK:
            prop = _PROPAGATORS.get(dim)
            if prop is None:
                prop = _Propagator(dim)
                _PROPAGATORS[dim] = prop
    return prop


def _bucket(n: int) -> int:
    return ((n + 31) // 32) * 32


def _work_sizes(dim_report: int, xi: complex, alpha: complex):
    size = _bucket(suggested_work_dim(dim_report, xi, alpha))
    for _ in range(7):
        yield min(size, 4096)
        if size >= 4096:
            break
        size = _bucket(int(size * 1.45) + 1)


def _inverse_rows_checked(xi: complex, alpha: complex, rows: np.ndarray,
                          dim_report: int, tol: float) -> tuple[np.ndarray, int]:
    """Rows of U^dag with an edge-weight guard, growing the window as needed.

    The finite-window product is exactly unitary whatever the size, so
    convergence to the infinite-dimensional operator is certified by the
    columns staying clear of the window edge (the generators are banded).
    """
    last = 0.0
    for size in _work_sizes(dim_report, xi, alpha):
        u = _get_propagator(size).inverse_rows(xi, alpha, rows)
        band = size - size // 4
        tail = u[band:, :]
        last = float(np.max(np.einsum("ij,ij->j", tail.conj(), tail).real))
        if last <= tol:
            return u, size
    raise TruncationError(
        f"edge weight {last:.3e} persists at the window-size cap "
        f"for xi={xi}, alpha={alpha}"
    )


# ---------------------------------------------------------------------------
# Objective evaluation on one subspace


def objective_rows(objective: ObjectiveSpec, space: FockSpace) -> np.ndarray:
    """Sorted column indices of U^dag that the objective evaluation needs.

    These are the measure indices plus any probability-observable indices;
    subspace membership only selects components of the resulting vectors,
    so the row set is identical for every subspace of a family.
    """
    mid = objective.mid
    if mid.n >= space.dim_report:
        raise ValueError("measure index outside the reporting window")
    rows = {mid.m, mid.n}
    for obs, _ in objective.lambda_terms:
        if isinstance(obs, FockProb):
            if obs.k >= space.dim_report:
                raise ValueError("observable index outside the reporting window")
            rows.add(obs.k)
        else:
            if obs.n >= space.dim_report:
                raise ValueError("observable index outside the reporting window")
            rows.update(range(obs.n + 1))
    return np.array(sorted(rows))


class _SubObjective:
    """Precomputed row bookkeeping for one (objective, subspace) pair."""

    def __init__(self, objective: ObjectiveSpec, sub: CoreSubspace, space: FockSpace):
        mid = objective.mid
        if max(sub.indices) >= space.dim_report:
            raise ValueError("subspace index outside the reporting window")
        self.rows = objective_rows(objective, space)
        pos = {j: i for i, j in enumerate(self.rows)}
        self.im, self.inn = pos[mid.m], pos[mid.n]
        self.terms = []
        for obs, w in objective.lambda_terms:
            if isinstance(obs, FockProb):
                self.terms.append(("fock", w, (pos[obs.k],)))
            else:
                self.terms.append(("err", w, tuple(pos[k] for k in range(obs.n + 1))))
        self.sub = np.array(sub.indices)
        self.space = space
        self.nsub = len(sub.indices)

    def rows_matrix(self, xi: complex, alpha: complex) -> np.ndarray:
        u, _ = _inverse_rows_checked(xi, alpha, self.rows,
                                     self.space.dim_report, self.space.trunc_tol)
        return u

    def restricted(self, xi: complex, alpha: complex) -> tuple[np.ndarray, int]:
        u, size = _inverse_rows_checked(xi, alpha, self.rows,
                                        self.space.dim_report, self.space.trunc_tol)
        return u[self.sub, :], size

    def h0(self, r: np.ndarray) -> np.ndarray | None:
        """Lambda-weighted part of the compressed operator."""
        if not self.terms:
            return None
        H = np.zeros((self.nsub, self.nsub), dtype=complex)
        for kind, w, cols in self.terms:
            if kind == "fock":
                v = r[:, cols[0]]
                H += w * np.outer(v, v.conj())
            else:
                H += w * np.eye(self.nsub)
                for c in cols:
                    v = r[:, c]
                    H -= w * np.outer(v, v.conj())
        return H

    def value(self, xi: complex, alpha: complex, full_phi: bool) -> float:
        """Phase-maximized top eigenvalue; endpoints-only when full_phi is False."""
        r, _ = self.restricted(xi, alpha)
        a = r[:, self.im]
        b = r[:, self.inn]
        H = self.h0(r)
        if H is None:
            g = np.vdot(a, b)
            return float(np.linalg.norm(a) * np.linalg.norm(b) + abs(g))
        K = np.outer(a, b.conj())
        Ks = K + K.conj().T
        if not full_phi:
            v0 = float(np.linalg.eigvalsh(H + Ks)[-1])
            v1 = float(np.linalg.eigvalsh(H - Ks)[-1])
            return max(v0, v1)
        return self._phi_max(H, a, b)[1]

    def value_at_phi(self, xi: complex, alpha: complex, phi: float) -> float:
        """Top eigenvalue of the compressed operator at a fixed phase."""
        return self.value_from_u(self.rows_matrix(xi, alpha), phi)

    def value_from_u(self, u: np.ndarray, phi: float) -> float:
        """Fixed-phase top eigenvalue from a precomputed row matrix."""
        r = u[self.sub, :]
        a = r[:, self.im]
        b = r[:, self.inn]
        H = self.h0(r)
        if H is None:
            g = np.vdot(a, b)
            t = (np.exp(1j * phi) * np.conj(g)).real
            na2 = float(np.vdot(a, a).real)
            nb2 = float(np.vdot(b, b).real)
            disc = max(0.0, t * t + na2 * nb2 - abs(g) ** 2)
            return float(t + math.sqrt(disc))
        M = H + np.exp(1j * phi) * np.outer(a, b.conj())
        M += np.exp(-1j * phi) * np.outer(b, a.conj())
        return float(np.linalg.eigvalsh(M)[-1])

    def _phi_max(self, H: np.ndarray, a: np.ndarray, b: np.ndarray,
                 grid: int = 64, tol: float = 1e-10) -> tuple[float, float]:
        K = np.outer(a, b.conj())
        KH = K.conj().T

        def top(phi: float) -> float:
            return float(np.linalg.eigvalsh(H + np.exp(1j * phi) * K
                                            + np.exp(-1j * phi) * KH)[-1])

        phis = 2.0 * math.pi * np.arange(grid) / grid
        vals = [top(p) for p in phis]
        i = int(np.argmax(vals))
        lo = phis[i] - 2.0 * math.pi / grid
        hi = phis[i] + 2.0 * math.pi / grid
        phi_ref, v_ref = _golden_max(top, lo, hi, tol)
        if v_ref >= vals[i]:
            return phi_ref % (2.0 * math.pi), v_ref
        return float(phis[i]), vals[i]

    def full(self, xi: complex, alpha: complex) -> tuple[float, np.ndarray, float]:
        """(value, coeffs, phi) at the phase-maximized point."""
        r, _ = self.restricted(xi, alpha)
        a = r[:, self.im]
        b = r[:, self.inn]
        H = self.h0(r)
        if H is None:
            return _rank2_closed_form(a, b)
        phi, _ = self._phi_max(H, a, b)
        M = H + np.exp(1j * phi) * np.outer(a, b.conj())
        M += np.exp(-1j * phi) * np.outer(b, a.conj())
        w, V = np.linalg.eigh(M)
        return float(w[-1]), V[:, -1].copy(), float(phi)


def _golden_max(f, lo: float, hi: float, tol: float) -> tuple[float, float]:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def _rank2_closed_form(a: np.ndarray, b: np.ndarray) -> tuple[float, np.ndarray, float]:
    """Top eigenpair of max_phi [e^{i phi} a b^dag + h.c.] in closed form."""
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    g = complex(np.vdot(a, b))
    value = na * nb + abs(g)
    n = a.shape[0]
    if na < 1e-300 or nb < 1e-300:
        coeffs = np.zeros(n, dtype=complex)
        coeffs[0] = 1.0
        return 0.0, coeffs, 0.0
    phi = float(np.angle(g)) if abs(g) > 0.0 else 0.0
    u = a / na
    beta = g / na
    wr = b - beta * u
    gam = float(np.linalg.norm(wr))
    if gam < 1e-14 * nb:
        return value, u.astype(complex), phi
    w = wr / gam
    v = np.exp(1j * phi) * gam * u + (nb - abs(beta)) * w
    v /= np.linalg.norm(v)
    return value, v, phi


# ---------------------------------------------------------------------------
# Public single-point operations


def compressed_operator(params: GaussianParams, phi: float, objective: ObjectiveSpec,
                        sub: CoreSubspace, space: FockSpace) -> np.ndarray:
    """P_V U^dag [X(phi) + sum lambda Pi] U P_V as a dense Hermitian matrix."""
    so = _SubObjective(objective, sub, space)
    r, _ = so.restricted(params.xi, params.alpha)
    a = r[:, so.im]
    b = r[:, so.inn]
    M = np.exp(1j * phi) * np.outer(a, b.conj())
    M = M + M.conj().T
    H = so.h0(r)
    if H is not None:
        M += H
    return M


def inner_max(params: GaussianParams, objective: ObjectiveSpec,
              sub: CoreSubspace, space: FockSpace) -> tuple[float, np.ndarray]:
    """Phase-maximized top eigenvalue and eigenvector on one subspace."""
    so = _SubObjective(objective, sub, space)
    value, coeffs, _ = so.full(params.xi, params.alpha)
    return value, coeffs


def maximize_over_subspace(objective: ObjectiveSpec, sub: CoreSubspace,
                           cfg: SearchConfig, warm: tuple[GaussianParams, ...] = (),
                           sub_rank: int = 0) -> tuple[float, GaussianParams]:
    """Multi-start parameter maximization restricted to a single subspace.

    The rank feeds the per-start seed substreams, so callers sweeping a
    family should pass the subspace's enumeration rank for reproducibility.
    """
    best = _maximize_subspace(objective, sub, sub_rank, cfg, cfg.space(),
                              tuple(warm))
    return best.value, GaussianParams(best.xi, best.alpha)


# ---------------------------------------------------------------------------
# Outer search


@dataclass(frozen=True)
class WarmStart:
    subspace: CoreSubspace
    params: GaussianParams


@dataclass
class _SubBest:
    value: float
    xi: complex
    alpha: complex
    start: int
    sub_rank: int
    sub: CoreSubspace
    locals_: list[float] = field(default_factory=list)
    nfev: int = 0


def _start_rng(seed: int, sub_rank: int, start: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(sub_rank, start))
    return np.random.Generator(np.random.PCG64(ss))


def _nm_options(cfg: SearchConfig) -> dict:
    # The objectives are smooth with order-one curvature at their maxima,
    # so a 1e-5 simplex radius resolves values to well below local_tol.
    return {"xatol": 1e-5, "fatol": 1e-12, "maxiter": cfg.nm_maxiter,
            "maxfev": 2 * cfg.nm_maxiter}


def _run_start_real(so: _SubObjective, cfg: SearchConfig, x0: np.ndarray,
                    full_phi: bool) -> tuple[float, np.ndarray, int]:
    def neg(x):
        return -so.value(complex(x[0]), complex(x[1]), full_phi)

    res = minimize(neg, x0, method="Nelder-Mead",
                   bounds=[(-cfg.xi_max, cfg.xi_max), (-cfg.alpha_max, cfg.alpha_max)],
                   options=_nm_options(cfg))
    return -float(res.fun), res.x, int(res.nfev)


def _clip_disc(re: float, im: float, rmax: float) -> complex:
    z = complex(re, im)
    r = abs(z)
    if r > rmax and r > 0.0:
        z *= rmax / r
    return z


def _run_start_complex(so: _SubObjective, cfg: SearchConfig, x0: np.ndarray
                       ) -> tuple[float, complex, complex, int]:
    def neg(x):
        xi = _clip_disc(x[0], x[1], cfg.xi_max)
        al = _clip_disc(x[2], x[3], cfg.alpha_max)
        return -so.value(xi, al, True)

    b = [(-cfg.xi_max, cfg.xi_max)] * 2 + [(-cfg.alpha_max, cfg.alpha_max)] * 2
    res = minimize(neg, x0, method="Nelder-Mead", bounds=b, options=_nm_options(cfg))
    xi = _clip_disc(res.x[0], res.x[1], cfg.xi_max)
    al = _clip_disc(res.x[2], res.x[3], cfg.alpha_max)
    return -float(res.fun), xi, al, int(res.nfev)


def _maximize_subspace(objective: ObjectiveSpec, sub: CoreSubspace, sub_rank: int,
                       cfg: SearchConfig, space: FockSpace,
                       warm: tuple[GaussianParams, ...] = (),
                       complex_mode: bool = False) -> _SubBest:
    """Multi-start local maximization on one subspace.

    Lambda-weighted objectives run the cheap two-endpoint phase during the
    walk and re-rank the local optima with the full phase maximization.
    """
    so = _SubObjective(objective, sub, space)
    full_phi = not bool(objective.lambda_terms)
    runs: list[tuple[float, complex, complex, int, int]] = []
    nfev = 0
    starts: list[tuple[int, np.ndarray]] = []
    for s in range(cfg.starts):
        rng = _start_rng(cfg.seed, sub_rank, s)
        if complex_mode:
            x0 = np.array([rng.uniform(-cfg.xi_max, cfg.xi_max),
                           rng.uniform(-cfg.xi_max, cfg.xi_max),
                           rng.uniform(-cfg.alpha_max, cfg.alpha_max),
                           rng.uniform(-cfg.alpha_max, cfg.alpha_max)])
        else:
            x0 = np.array([rng.uniform(-cfg.xi_max, cfg.xi_max),
                           rng.uniform(-cfg.alpha_max, cfg.alpha_max)])
        starts.append((s, x0))
    # The origin start keeps strongly penalized objectives honest: their
    # maxima collapse toward zero parameters, where random starts can
    # stall on the flat penalized plateau.
    starts.append((cfg.starts, np.zeros(4 if complex_mode else 2)))
    for i, wp in enumerate(warm):
        if complex_mode:
            x0 = np.array([wp.xi.real, wp.xi.imag, wp.alpha.real, wp.alpha.imag])
        else:
            x0 = np.array([wp.xi.real, wp.alpha.real])
        starts.append((cfg.starts + 1 + i, x0))

    def one(item):
        s, x0 = item
        if complex_mode:
            v, xi, al, ne = _run_start_complex(so, cfg, x0)
        else:
            v, x, ne = _run_start_real(so, cfg, x0, full_phi)
            xi, al = complex(x[0]), complex(x[1])
        return (v, xi, al, s, ne)

    if cfg.workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=cfg.workers) as ex:
            runs = list(ex.map(one, starts))
    else:
        runs = [one(item) for item in starts]
    nfev = sum(r[4] for r in runs)
    if not full_phi and not complex_mode:
        rerank = []
        for v, xi, al, s, ne in runs:
            rerank.append((so.value(xi, al, True), xi, al, s, ne))
        runs = rerank
    best = max(runs, key=lambda r: (r[0], -r[3]))
    locals_ = sorted((r[0] for r in runs), reverse=True)[:5]
    return _SubBest(best[0], best[1], best[2], best[3], sub_rank, sub,
                    locals_, nfev)


def _iter_plan(spec: HierarchySpec, subs: list[CoreSubspace]) -> tuple[int, bool]:
    """(number of always-evaluated head subspaces, whether a tail sweep follows)."""
    label = spec_label(spec)
    if label.startswith("N"):
        return 1, True
    if label == "fock" or label.startswith("L"):
        return 0, True
    return len(subs), False


def outer_maximize(objective: ObjectiveSpec, spec: HierarchySpec, cfg: SearchConfig,
                   warm: tuple[WarmStart, ...] = ()) -> ThresholdResult:
    """Family maximum of the objective over Gaussian-evolved core states.

    Deterministic for identical inputs, including under parallel start
    evaluation: every start draws from its own seed substream and the
    reduction is ordered by (value, start, subspace rank).
    """
    space = cfg.space()
    subs = core_subspaces(spec, objective.mid, space)
    warm_by_sub: dict[tuple[int, ...], list[GaussianParams]] = {}
    for w in warm:
        warm_by_sub.setdefault(w.subspace.indices, []).append(w.params)

    head, has_tail = _iter_plan(spec, subs)
    bests: list[_SubBest] = []
    early_stopped = False
    evaluated = 0

    def run(rank: int) -> _SubBest:
        sub = subs[rank]
        wp = tuple(warm_by_sub.get(sub.indices, ()))
        return _maximize_subspace(objective, sub, rank, cfg, space, wp)

    for rank in range(head):
        bests.append(run(rank))
        evaluated += 1
    if has_tail:
        decreases = 0
        prev = None
        for rank in range(head, len(subs)):
            b = run(rank)
            bests.append(b)
            evaluated += 1
            if prev is not None and b.value < prev:
                decreases += 1
            else:
                decreases = 0
            prev = b.value
            if (not cfg.strict_sweep and decreases >= cfg.tail_patience
                    and rank + 1 < len(subs)):
                early_stopped = True
                break

    best = max(bests, key=lambda b: (b.value, -b.start, -b.sub_rank))
    warnings: list[str] = []
    complex_used = False

    value, coeffs, phi = _SubObjective(objective, best.sub, space).full(best.xi, best.alpha)
    params = GaussianParams(best.xi, best.alpha)

    margin, exceed = _validate(objective, spec, subs, cfg, space, value)
    if exceed is not None:
        xi0, al0, phi0, sub_rank0, sample_value = exceed
        if sample_value - value > cfg.local_tol:
            complex_used = True
            cb = _maximize_subspace(objective, subs[sub_rank0], sub_rank0, cfg, space,
                                    (GaussianParams(xi0, al0),), complex_mode=True)
            if cb.value > value:
                best = cb
                value, coeffs, phi = _SubObjective(objective, best.sub, space).full(
                    best.xi, best.alpha)
                params = GaussianParams(best.xi, best.alpha)
            margin2, exceed2 = _validate(objective, spec, subs, cfg, space, value)
            if exceed2 is not None and exceed2[4] - value > cfg.local_tol:
                raise ValidationError(
                    f"sample objective {exceed2[4]:.12g} exceeds recomputed "
                    f"maximum {value:.12g} beyond tolerance")
            margin = margin2
            warnings.append("complex search engaged after validation exceedance")
        else:
            so = _SubObjective(objective, subs[sub_rank0], space)
            x0 = np.array([xi0.real, xi0.imag, al0.real, al0.imag])
            v, xi, al, _ = _run_start_complex(so, cfg, x0)
            if v > value:
                best = _SubBest(v, xi, al, -1, sub_rank0, subs[sub_rank0])
                value, coeffs, phi = so.full(xi, al)
                params = GaussianParams(xi, al)
                warnings.append("validation sample polished into the reported maximum")
            margin = value - sample_value

    lam_cap = 1.0 + objective.lambda_total()
    value = min(max(value, 0.0), lam_cap + 1e-12)

    diag = SearchDiagnostics(
        starts=cfg.starts,
        best_start=best.start,
        subspaces_total=len(subs),
        subspaces_evaluated=evaluated,
        early_stopped=early_stopped,
        top5_spread=(max(best.locals_) - min(best.locals_)) if best.locals_ else 0.0,
        validation_margin=margin,
        complex_search=complex_used,
        n_evals=sum(b.nfev for b in bests),
        work_dim_max=max(_PROPAGATORS) if _PROPAGATORS else 0,
        warnings=tuple(warnings),
    )
    return ThresholdResult(value, params, phi, best.sub,
                           tuple(complex(c) for c in coeffs), diag)


def _validate(objective: ObjectiveSpec, spec: HierarchySpec, subs: list[CoreSubspace],
              cfg: SearchConfig, space: FockSpace, value: float):
    """Random fully-complex (xi, alpha, phi) draws over the whole family.

    Returns (margin, worst-exceedance info or None): margin is the gap
    between the search value and the best sample seen.
    """
    if cfg.validation_samples <= 0:
        return math.inf, None
    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(entropy=cfg.seed, spawn_key=(1 << 20,))))
    sos = [_SubObjective(objective, sub, space) for sub in subs]
    rows = sos[0].rows
    best_sample = -math.inf
    exceed = None
    for _ in range(cfg.validation_samples):
        r1, t1 = cfg.xi_max * math.sqrt(rng.uniform()), rng.uniform(0, 2 * math.pi)
        r2, t2 = cfg.alpha_max * math.sqrt(rng.uniform()), rng.uniform(0, 2 * math.pi)
        phi = rng.uniform(0, 2 * math.pi)
        xi = r1 * complex(math.cos(t1), math.sin(t1))
        al = r2 * complex(math.cos(t2), math.sin(t2))
        u, _ = _inverse_rows_checked(xi, al, rows, space.dim_report,
                                     space.trunc_tol)
        for rank, so in enumerate(sos):
            v = so.value_from_u(u, phi)
            if v > best_sample:
                best_sample = v
                if v > value:
                    exceed = (xi, al, phi, rank, v)
    return value - best_sample, exceed
