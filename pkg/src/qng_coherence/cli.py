"""Command line front end and artifact serialization.

Subcommands: thresholds, converge, curve, depth, certify.  Results are
printed as short human-readable tables and can be written as JSON or CSV
artifacts via --out/--format.  Every JSON artifact embeds schema_version 1
and the fully resolved configuration, so a file is self-describing; CSV
artifacts carry the same identity in a single header comment line.

Exit codes: 0 success (certify: certified), 1 not certified, 2 usage or
malformed input, 3 search validation failure, 4 no positive noise depth,
5 unphysical state input.

Artifacts are cached on disk under QNG_CACHE_DIR (default .qng-cache in
the working directory), one record per command and resolved-parameter
hash; a cache hit reproduces the artifact byte for byte.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from dataclasses import asdict

import numpy as np

from .cores import SpecError
from .fock import DensityMatrix
from .decoherence import (NoDepthError, depth_boundary, loss_depth,
                          thermal_depth)
from .measures import (CoherenceMeasureId, ErrorProb, FockProb, coherence_element,
                       probability)
from .optimize import SearchConfig, ValidationError
from .thresholds import (EnvelopeError, absolute_threshold, convergence_study,
                         default_lambda_grid, physical_boundary, relative_curve_2d,
                         relative_surface_3d, threshold_table, _FAMILY_BUILDERS,
                         _ORDERED_FAMILIES)

SCHEMA_VERSION = 1


class UsageError(ValueError):
    """Malformed command line value or input file."""


class UnphysicalStateError(ValueError):
    """Input parsed but cannot come from a physical quantum state."""


# ---------------------------------------------------------------------------
# Value parsing


def parse_measure(text: str) -> CoherenceMeasureId:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"measure must look like 'm,n', got {text!r}")
    try:
        m, n = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise UsageError(f"measure indices must be integers, got {text!r}") from exc
    try:
        return CoherenceMeasureId(m, n)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def parse_int_list(text: str) -> list[int]:
    try:
        if ".." in text:
            lo, hi = text.split("..")
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(p) for p in text.split(",") if p != ""]
    except ValueError as exc:
        raise UsageError(f"expected 'a,b,c' or 'lo..hi', got {text!r}") from exc


def parse_float_list(text: str) -> list[float]:
    try:
        if text.startswith("lin:"):
            _, lo, hi, count = text.split(":")
            return [float(x) for x in np.linspace(float(lo), float(hi), int(count))]
        return [float(p) for p in text.split(",") if p != ""]
    except (ValueError, TypeError) as exc:
        raise UsageError(f"expected 'x,y,z' or 'lin:lo:hi:count', got {text!r}") from exc


def parse_lambda_grid(text: str | None) -> list[float]:
    """Either a per-sign point count or an explicit list of weights."""
    if text is None:
        return list(default_lambda_grid())
    try:
        return list(default_lambda_grid(per_sign=int(text)))
    except ValueError:
        pass
    return parse_float_list(text)


def observable_token(token: str, mid: CoherenceMeasureId):
    if token == "Pm":
        return FockProb(mid.m)
    if token == "Pn":
        return FockProb(mid.n)
    if token == "Pe":
        return ErrorProb(mid.n)
    raise UsageError(f"observable must be Pm, Pn, or Pe, got {token!r}")


def parse_observables(text: str, mid: CoherenceMeasureId):
    """One token for a curve, 'Pm,Pe' or 'Pn,Pe' for a surface."""
    tokens = [t.strip() for t in text.split(",") if t.strip()]
    if len(tokens) == 1:
        return observable_token(tokens[0], mid), None
    if len(tokens) == 2:
        if tokens[1] != "Pe" or tokens[0] not in ("Pm", "Pn"):
            raise UsageError(
                f"a surface needs a number observable then Pe, got {text!r}")
        return observable_token(tokens[0], mid), observable_token(tokens[1], mid)
    raise UsageError(f"expected one or two observables, got {text!r}")


def build_spec(family: str, order: int, excluded: int):
    if family not in _FAMILY_BUILDERS:
        raise UsageError(f"unknown hierarchy {family!r}")
    if family in _ORDERED_FAMILIES and order < 1:
        raise UsageError(f"hierarchy {family!r} needs --order >= 1")
    try:
        return _FAMILY_BUILDERS[family](order, excluded)
    except (SpecError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def config_from_args(args) -> SearchConfig:
    try:
        return SearchConfig(
            starts=args.starts, seed=args.seed, xi_max=args.xi_max,
            alpha_max=args.alpha_max, validation_samples=args.validation_samples,
            dim_report=args.dim, workers=args.workers,
            strict_sweep=args.strict_sweep)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# ---------------------------------------------------------------------------
# State files


def load_state(path: str, tol: float = 1e-8) -> DensityMatrix:
    """Read a density matrix file and verify it is physical.

    Format: {"dim": n, "elements": [[re, im], ...]} with n*n entries in
    row-major order.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read state file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"state file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or "dim" not in data or "elements" not in data:
        raise UsageError("state file must carry 'dim' and 'elements'")
    dim = data["dim"]
    raw = data["elements"]
    if not isinstance(dim, int) or dim < 2:
        raise UsageError("state dimension must be an integer >= 2")
    if not isinstance(raw, list) or len(raw) != dim * dim:
        raise UsageError(f"expected {dim * dim} elements, got "
                         f"{len(raw) if isinstance(raw, list) else 'non-list'}")
    try:
        arr = np.array(raw, dtype=float)
    except (ValueError, TypeError) as exc:
        raise UsageError("elements must be [re, im] number pairs") from exc
    if arr.shape != (dim * dim, 2):
        raise UsageError("elements must be [re, im] number pairs")
    mat = (arr[:, 0] + 1j * arr[:, 1]).reshape(dim, dim)
    herm = float(np.max(np.abs(mat - mat.conj().T)))
    if herm > tol:
        raise UnphysicalStateError(f"state is not Hermitian (defect {herm:.3e})")
    tr = complex(np.trace(mat))
    if abs(tr - 1.0) > tol:
        raise UnphysicalStateError(f"state trace is {tr.real:.10f}, not 1")
    mat = 0.5 * (mat + mat.conj().T)
    wmin = float(np.linalg.eigvalsh(mat)[0])
    if wmin < -tol:
        raise UnphysicalStateError(f"state has negative eigenvalue {wmin:.3e}")
    return DensityMatrix(mat)


def save_state(mat, path: str) -> None:
    mat = np.asarray(getattr(mat, "elements", mat), dtype=complex)
    data = {"dim": int(mat.shape[0]),
            "elements": [[float(z.real), float(z.imag)] for z in mat.reshape(-1)]}
    _atomic_write(path, json.dumps(data, indent=2) + "\n")


# ---------------------------------------------------------------------------
# Artifacts and cache


def _canonical(params: dict) -> str:
    return json.dumps(params, sort_keys=True, separators=(",", ":"))


def _cache_dir(args) -> str:
    if getattr(args, "cache_dir", None):
        return args.cache_dir
    return os.environ.get("QNG_CACHE_DIR", ".qng-cache")


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_cached(args, command: str, params: dict, compute) -> tuple[dict, str]:
    """Return (artifact, serialized text), via the disk cache when allowed."""
    key_src = _canonical({"command": command, "schema_version": SCHEMA_VERSION,
                          "params": params})
    key = hashlib.sha256(key_src.encode("utf-8")).hexdigest()
    path = os.path.join(_cache_dir(args), f"{command}-{key}.json")
    if not args.no_cache and os.path.exists(path):
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
        return json.loads(text), text
    artifact = {"schema_version": SCHEMA_VERSION, "command": command,
                "config": params}
    artifact.update(compute())
    text = json.dumps(artifact, sort_keys=True, indent=2) + "\n"
    if not args.no_cache:
        _atomic_write(path, text)
    return artifact, text


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _csv_cell(cell) -> str:
    if isinstance(cell, bool):
        return "true" if cell else "false"
    if isinstance(cell, float):
        return _fmt(cell)
    if isinstance(cell, (list, tuple)):
        return ";".join(str(c) for c in cell)
    return str(cell)


def _csv_text(command: str, params: dict, columns: list[str],
              rows: list[list]) -> str:
    key = hashlib.sha256(_canonical(params).encode("utf-8")).hexdigest()[:16]
    lines = [f"# qng {command} schema_version={SCHEMA_VERSION} "
             f"config_sha256_prefix={key} floats=%.17g"]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_csv_cell(cell) for cell in row))
    return "\n".join(lines) + "\n"


def _emit(args, artifact: dict, text: str, csv_payload) -> None:
    if not getattr(args, "out", None):
        return
    if args.format == "csv":
        columns, rows = csv_payload
        _atomic_write(args.out, _csv_text(artifact["command"],
                                          artifact["config"], columns, rows))
    else:
        _atomic_write(args.out, text)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_thresholds(args) -> int:
    mid = parse_measure(args.measure)
    cfg = config_from_args(args)
    orders = parse_int_list(args.orders) if args.orders else []
    if args.hierarchy in _ORDERED_FAMILIES and not orders:
        raise UsageError(f"hierarchy {args.hierarchy!r} needs --orders")
    params = {"measure": [mid.m, mid.n], "hierarchy": args.hierarchy,
              "orders": orders, "excluded": args.excluded, "search": asdict(cfg)}

    def compute():
        rows = threshold_table(mid, args.hierarchy, orders, cfg,
                               excluded=args.excluded)
        return {"rows": [r.to_dict() for r in rows]}

    artifact, text = run_cached(args, "thresholds", params, compute)
    csv_rows = [[r["label"], r["order"], float(r["value"]), r["saturated"]]
                for r in artifact["rows"]]
    for r in artifact["rows"]:
        tag = "  saturated" if r["saturated"] else ""
        print(f"{r['label']:>12}  T[{mid.m},{mid.n}] = {r['value']:.6f}{tag}")
    _emit(args, artifact, text, (["label", "order", "value", "saturated"], csv_rows))
    return 0


def cmd_converge(args) -> int:
    mid = parse_measure(args.measure)
    cfg = config_from_args(args)
    spans = parse_int_list(args.n_range)
    params = {"measure": [mid.m, mid.n], "n_range": spans,
              "exclude": args.exclude, "search": asdict(cfg)}

    def compute():
        rows = convergence_study(mid, spans, args.exclude, cfg)
        return {"rows": [r.to_dict() for r in rows]}

    artifact, text = run_cached(args, "converge", params, compute)
    csv_rows = [[r["upper"], r["excluded"], float(r["value"]), float(r["gap"])]
                for r in artifact["rows"]]
    for r in artifact["rows"]:
        print(f"N={r['upper']:>3}  T = {r['value']:.8f}  1-T = {r['gap']:.3e}")
    _emit(args, artifact, text, (["upper", "excluded", "value", "gap"], csv_rows))
    return 0


def cmd_curve(args) -> int:
    mid = parse_measure(args.measure)
    cfg = config_from_args(args)
    obs, obs_err = parse_observables(args.observable, mid)
    probs = parse_float_list(args.p_grid)
    grid = parse_lambda_grid(args.lambda_grid)
    params = {"measure": [mid.m, mid.n], "hierarchy": args.hierarchy,
              "order": args.order, "excluded": args.excluded,
              "observable": args.observable, "p_grid": probs,
              "lambda_grid": args.lambda_grid,
              "refine_tol": args.refine_tol, "search": asdict(cfg)}
    surface_mode = obs_err is not None
    if surface_mode:
        if args.hierarchy == "physical":
            raise UsageError("surfaces are computed for hierarchies only")
        probs_err = parse_float_list(args.p_grid2) if args.p_grid2 else probs
        params["p_grid2"] = probs_err

    def compute():
        if surface_mode:
            spec = build_spec(args.hierarchy, args.order, args.excluded)
            surf = relative_surface_3d(mid, spec, obs, obs_err, probs, probs_err,
                                       cfg, grid_number=grid, grid_error=grid)
            bound = physical_boundary(mid, obs, list(surf.probs_number), cfg)
            return {"surface": surf.to_dict(),
                    "physical_boundary": bound.to_dict()}
        if args.hierarchy == "physical":
            curve = physical_boundary(mid, obs, probs, cfg, lambda_grid=grid,
                                      refine_tol=args.refine_tol)
            return {"curve": curve.to_dict()}
        spec = build_spec(args.hierarchy, args.order, args.excluded)
        curve = relative_curve_2d(mid, spec, obs, probs, cfg, lambda_grid=grid,
                                  refine_tol=args.refine_tol)
        bound = physical_boundary(mid, obs, list(curve.probs), cfg)
        return {"curve": curve.to_dict(), "physical_boundary": bound.to_dict()}

    artifact, text = run_cached(args, "curve", params, compute)
    if "surface" in artifact:
        surf = artifact["surface"]
        bvals = artifact["physical_boundary"]["values"]
        csv_rows = []
        for i, pn in enumerate(surf["probs_number"]):
            for j, pe in enumerate(surf["probs_error"]):
                csv_rows.append([float(pn), float(pe),
                                 float(surf["values"][i][j]),
                                 float(bvals[i]),
                                 surf["top_subspace"][i][j],
                                 surf["crossing"][i][j]])
                print(f"Pn={pn:.4f}  Pe={pe:.4f}  c = {surf['values'][i][j]:.6f}")
        _emit(args, artifact, text,
              (["prob_number", "prob_error", "value", "physical_boundary",
                "top_subspace", "crossing"], csv_rows))
    else:
        curve = artifact["curve"]
        bvals = (artifact["physical_boundary"]["values"]
                 if "physical_boundary" in artifact else curve["values"])
        csv_rows = [[float(p), float(v), float(l), float(b)] for p, v, l, b in
                    zip(curve["probs"], curve["values"],
                        curve["active_lambdas"], bvals)]
        for p, v in zip(curve["probs"], curve["values"]):
            print(f"P={p:.4f}  c = {v:.6f}")
        _emit(args, artifact, text,
              (["prob", "value", "active_lambda", "physical_boundary"], csv_rows))
    return 0


def cmd_depth(args) -> int:
    mid = parse_measure(args.measure)
    rho0 = load_state(args.state) if args.state else None
    state_digest = None
    if args.state:
        with open(args.state, "rb") as fh:
            state_digest = hashlib.sha256(fh.read()).hexdigest()
    if args.threshold is None and args.hierarchy is None:
        raise UsageError("give either --threshold or --hierarchy/--order")
    cfg = config_from_args(args)
    params = {"measure": [mid.m, mid.n], "threshold": args.threshold,
              "hierarchy": args.hierarchy, "order": args.order,
              "excluded": args.excluded, "kind": args.kind, "nbar": args.nbar,
              "gamma": args.gamma, "state_sha256": state_digest,
              "tol": args.tol, "search": asdict(cfg)}

    def resolve_threshold() -> float:
        if args.threshold is not None:
            return args.threshold
        spec = build_spec(args.hierarchy, args.order, args.excluded)
        return absolute_threshold(mid, spec, cfg).value

    if args.boundary_sweep:
        nbars = parse_float_list(args.nbars) if args.nbars else None
        params["boundary_sweep"] = True
        params["nbars"] = nbars

        def compute():
            threshold = resolve_threshold()
            pts = depth_boundary(mid, threshold, nbars, rho0=rho0, tol=args.tol)
            return {"threshold": threshold,
                    "boundary": [p.to_dict() for p in pts]}

        artifact, text = run_cached(args, "depth", params, compute)
        csv_rows = [[float(p["nbar"]), float(p["gamma"]), p["saturated"]]
                    for p in artifact["boundary"]]
        for p in artifact["boundary"]:
            print(f"nbar={p['nbar']:.6f}  loss_depth={p['gamma']:.6f}")
        _emit(args, artifact, text, (["nbar", "gamma", "saturated"], csv_rows))
        return 0

    def compute():
        threshold = resolve_threshold()
        if args.kind == "loss":
            res = loss_depth(mid, threshold, nbar=args.nbar, rho0=rho0,
                             tol=args.tol)
        else:
            res = thermal_depth(mid, threshold, gamma=args.gamma, rho0=rho0,
                                tol=args.tol)
        return {"depth": res.to_dict()}

    artifact, text = run_cached(args, "depth", params, compute)
    d = artifact["depth"]
    tag = "  saturated" if d["saturated"] else ""
    tag += "  beyond-model-validity" if d["validity_exceeded"] else ""
    print(f"{d['kind']} depth = {d['value']:.6f} at threshold "
          f"{d['threshold']:.6f}{tag}")
    _emit(args, artifact, text,
          (["kind", "value", "threshold", "saturated", "validity_exceeded"],
           [[d["kind"], float(d["value"]), float(d["threshold"]),
             d["saturated"], d["validity_exceeded"]]]))
    return 0


def _default_orders(family: str, mid: CoherenceMeasureId) -> list[int]:
    if family == "N":
        return list(range(1, mid.n + 1))
    if family == "L":
        return list(range(1, mid.n - mid.m + 1))
    return [0]


def _physical_cap(mid, obs, p, cfg) -> float:
    return physical_boundary(mid, obs, [p], cfg).values[0]


def cmd_certify(args) -> int:
    mid = parse_measure(args.measure)
    cfg = config_from_args(args)
    if (args.state is None) == (args.c is None):
        raise UsageError("give exactly one of --state or --c")

    state_digest = None
    supplied: dict[str, float] = {}
    if args.state is not None:
        if args.pm is not None or args.pn is not None or args.pe is not None:
            raise UsageError("probability flags apply to measured tuples only")
        rho = load_state(args.state)
        if rho.dim <= mid.n:
            raise UsageError("state window does not cover the measure indices")
        with open(args.state, "rb") as fh:
            state_digest = hashlib.sha256(fh.read()).hexdigest()
        value = coherence_element(rho, mid)
        if args.observable:
            obs, obs_err = parse_observables(args.observable, mid)
            tok = args.observable.split(",")[0].strip()
            supplied[tok] = probability(rho, obs)
            if obs_err is not None:
                supplied["Pe"] = probability(rho, obs_err)
    else:
        value = args.c
        if args.observable:
            raise UsageError("--observable applies to state files only")
        for tok, given in (("Pm", args.pm), ("Pn", args.pn), ("Pe", args.pe)):
            if given is not None:
                if not 0.0 <= given <= 1.0:
                    raise UsageError(f"{tok} must lie in [0, 1]")
                supplied[tok] = given
        if "Pm" in supplied and "Pn" in supplied:
            raise UsageError("give at most one number probability")
        if value < 0.0:
            raise UsageError("coherence must be nonnegative")

    number_tok = next((t for t in ("Pn", "Pm") if t in supplied), None)
    error_p = supplied.get("Pe")

    # Physicality: the claimed coherence must fit under the kinematic
    # bound at every supplied probability (each bound alone is valid).
    cap = 1.0
    for tok, p in supplied.items():
        cap = min(cap, _physical_cap(mid, observable_token(tok, mid), p, cfg))
    if value > cap + 1e-9:
        raise UnphysicalStateError(
            f"coherence {value:.6f} exceeds the kinematic bound {cap:.6f} "
            "at the supplied probabilities")

    orders = (parse_int_list(args.orders) if args.orders
              else _default_orders(args.hierarchy, mid))
    params = {"measure": [mid.m, mid.n], "hierarchy": args.hierarchy,
              "orders": orders, "excluded": args.excluded,
              "threshold": args.threshold, "coherence": value,
              "supplied": {k: supplied[k] for k in sorted(supplied)},
              "lambda_grid": args.lambda_grid,
              "state_sha256": state_digest, "search": asdict(cfg)}

    def compute():
        grid = parse_lambda_grid(args.lambda_grid)
        rows = []
        for order in orders:
            spec = build_spec(args.hierarchy, order, args.excluded)
            if args.threshold is not None:
                t_abs = args.threshold
            else:
                t_abs = absolute_threshold(mid, spec, cfg).value
            rows.append({"order": order, "kind": "absolute",
                         "threshold": t_abs, "passed": bool(value > t_abs),
                         "margin": value - t_abs})
            if number_tok is not None and error_p is not None:
                surf = relative_surface_3d(
                    mid, spec, observable_token(number_tok, mid),
                    ErrorProb(mid.n), [supplied[number_tok]], [error_p], cfg,
                    grid_number=grid, grid_error=grid)
                t_rel = surf.values[0][0]
                rows.append({"order": order, "kind": "relative-3d",
                             "threshold": t_rel, "passed": bool(value > t_rel),
                             "margin": value - t_rel})
            elif supplied:
                tok = number_tok if number_tok is not None else "Pe"
                curve = relative_curve_2d(mid, spec, observable_token(tok, mid),
                                          [supplied[tok]], cfg, lambda_grid=grid)
                t_rel = curve.values[0]
                rows.append({"order": order, "kind": "relative-2d",
                             "threshold": t_rel, "passed": bool(value > t_rel),
                             "margin": value - t_rel})
        certified = [r["order"] for r in rows if r["passed"]]
        return {"certify": {
            "coherence": value, "criteria": rows,
            "certified": bool(certified),
            "max_certified_order": max(certified) if certified else None}}

    artifact, text = run_cached(args, "certify", params, compute)
    cert = artifact["certify"]
    for c in cert["criteria"]:
        verdict = "PASS" if c["passed"] else "FAIL"
        print(f"order {c['order']} {c['kind']:>12}: C = {cert['coherence']:.6f} "
              f"vs {c['threshold']:.6f}  margin {c['margin']:+.6f}  {verdict}")
    print("certified" if cert["certified"] else "not certified")
    csv_rows = [[c["order"], c["kind"], float(cert["coherence"]),
                 float(c["threshold"]), float(c["margin"]), c["passed"]]
                for c in cert["criteria"]]
    _emit(args, artifact, text,
          (["order", "kind", "coherence", "threshold", "margin", "passed"],
           csv_rows))
    return 0 if cert["certified"] else 1


# ---------------------------------------------------------------------------
# Parser


def _add_search_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dim", type=int, default=40,
                   help="reporting-window dimension (default 40)")
    p.add_argument("--starts", type=int, default=24,
                   help="local search restarts per subspace (default 24)")
    p.add_argument("--seed", type=int, default=7, help="search seed (default 7)")
    p.add_argument("--workers", type=int, default=1,
                   help="threads for restart evaluation (default 1)")
    p.add_argument("--validation-samples", type=int, default=2000,
                   help="random complex draws validating the maximum")
    p.add_argument("--strict-sweep", action="store_true",
                   help="disable early stopping over tail subspaces")
    p.add_argument("--xi-max", type=float, default=1.0,
                   help="squeeze parameter magnitude bound (default 1.0)")
    p.add_argument("--alpha-max", type=float, default=3.0,
                   help="displacement magnitude bound (default 3.0)")


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="write the artifact here")
    p.add_argument("--format", choices=["json", "csv"], default="json",
                   help="artifact format for --out (default json)")
    p.add_argument("--no-cache", action="store_true",
                   help="bypass the artifact cache")
    p.add_argument("--cache-dir", help="override the artifact cache directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qng",
        description="Hierarchical certification of quantum non-Gaussian "
                    "coherence in the Fock basis")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("thresholds", help="absolute thresholds for one hierarchy")
    p.add_argument("--measure", required=True, help="coherence indices 'm,n'")
    p.add_argument("--hierarchy", required=True,
                   choices=sorted(_FAMILY_BUILDERS))
    p.add_argument("--orders", help="orders as 'a,b,c' or 'lo..hi'")
    p.add_argument("--excluded", type=int, default=0,
                   help="excluded index for the missing family")
    _add_search_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("converge", help="gap study for growing-span families")
    p.add_argument("--measure", required=True)
    p.add_argument("--n-range", required=True, help="spans as 'a,b,c' or 'lo..hi'")
    p.add_argument("--exclude", type=int, default=0,
                   help="measure index left out of every span")
    _add_search_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("curve", help="probability-conditioned threshold curve")
    p.add_argument("--measure", required=True)
    p.add_argument("--hierarchy", required=True,
                   choices=sorted(_FAMILY_BUILDERS) + ["physical"])
    p.add_argument("--order", type=int, default=0)
    p.add_argument("--excluded", type=int, default=0)
    p.add_argument("--observable", required=True,
                   help="Pm, Pn, or Pe; 'Pn,Pe' or 'Pm,Pe' for a surface")
    p.add_argument("--p-grid", required=True,
                   help="probabilities as 'x,y' or 'lin:lo:hi:count'")
    p.add_argument("--p-grid2",
                   help="error probabilities for a surface (default: --p-grid)")
    p.add_argument("--lambda-grid",
                   help="per-sign point count or explicit weights (default 61)")
    p.add_argument("--refine-tol", type=float, default=1e-3,
                   help="envelope refinement tolerance (default 1e-3)")
    _add_search_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("depth", help="loss and thermal robustness depths")
    p.add_argument("--measure", required=True)
    p.add_argument("--threshold", type=float,
                   help="explicit threshold (otherwise resolved from "
                        "--hierarchy/--order)")
    p.add_argument("--hierarchy", choices=sorted(_FAMILY_BUILDERS))
    p.add_argument("--order", type=int, default=0)
    p.add_argument("--excluded", type=int, default=0)
    p.add_argument("--kind", choices=["loss", "thermal"], default="loss")
    p.add_argument("--nbar", type=float, default=0.0,
                   help="fixed thermal weight for loss depth")
    p.add_argument("--gamma", type=float, default=0.0,
                   help="fixed loss weight for thermal depth")
    p.add_argument("--boundary-sweep", action="store_true",
                   help="sweep nbar and solve the loss depth at each point")
    p.add_argument("--nbars", help="thermal weights for the boundary sweep")
    p.add_argument("--state", help="depth of this state instead of the ideal one")
    p.add_argument("--tol", type=float, default=1e-6,
                   help="bisection bracket tolerance (default 1e-6)")
    _add_search_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_depth)

    p = sub.add_parser("certify",
                       help="evaluate a state or measurement against thresholds")
    p.add_argument("--measure", required=True)
    p.add_argument("--state", help="density matrix JSON file")
    p.add_argument("--c", type=float, help="measured coherence value")
    p.add_argument("--pm", type=float, help="measured probability of Fock m")
    p.add_argument("--pn", type=float, help="measured probability of Fock n")
    p.add_argument("--pe", type=float,
                   help="measured error probability above Fock n")
    p.add_argument("--hierarchy", default="N",
                   choices=sorted(_FAMILY_BUILDERS))
    p.add_argument("--orders", help="orders to test (default: all beatable)")
    p.add_argument("--excluded", type=int, default=0)
    p.add_argument("--threshold", type=float,
                   help="absolute threshold override (skips the search)")
    p.add_argument("--observable",
                   help="with --state: also test the relative criterion at "
                        "the state's value of this observable")
    p.add_argument("--lambda-grid", default="21",
                   help="per-sign point count or explicit weights")
    _add_search_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_certify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except UnphysicalStateError as exc:
        print(f"unphysical input: {exc}", file=sys.stderr)
        return 5
    except (ValidationError, EnvelopeError) as exc:
        print(f"search validation failure: {exc}", file=sys.stderr)
        return 3
    except NoDepthError as exc:
        print(f"no depth: {exc}", file=sys.stderr)
        return 4
    except (SpecError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
