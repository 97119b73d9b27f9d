"""Experiment runner: config-driven subcommands over all modules.

Subcommands: enumerate | sample | oracle | certificate | cumulants |
estimate | thresholds | sweep | verify.  Configs are JSON; CSV output uses a
fixed versioned header with floats at 17 significant digits and is written
atomically (temp file + rename).  Exit codes: 0 success, 1 verification
failure, 2 config error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import os
import sys
import tempfile

from .certificate import analytic_bounds, build_certificate, corr_bound
from .cumulants import f_upper_bound, f_value, kappa, kappa_upper_bound
from .estimators import EstimatorSpec, first_moment, mc_correlation
from .graphs import GraphClassSpec, enumerate_class
from .guards import GuardError
from .models import (ModelParams, PdsParams, PriorSpec, SbmParams,
                     SubmatrixParams, WignerParams, dump_sample, sample)
from .oracle import build_gram, exact_corr
from .thresholds import threshold_flags

CSV_SCHEMA_VERSION = 1

SWEEP_COLUMNS = [
    "grid_index", "stream", "task", "model", "kind", "n", "D", "k", "trials", "seed",
    "lambda", "rho", "p0", "p1", "m", "q", "k0", "l0",
    "amp_threshold", "below_amp", "bbp_gap", "below_bbp", "ks", "below_ks",
    "cert_residual", "cert_bound", "oracle_corr", "oracle_mmse",
    "efx_mc", "efx_se", "efx_analytic", "ef2_mc", "ef2_se", "corr_mc", "corr_se",
    "envelope", "sum_ks", "error",
]


class ConfigError(ValueError):
    """Invalid configuration; reported with diagnostics and exit code 2."""


def _fmt(value) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv_atomic(path: str, header: list[str], rows: list[dict]) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(prefix=".lowdeg-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="ascii", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(row.get(col)) for col in header) + "\n")
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_prior(spec) -> PriorSpec:
    if spec in (None, "rademacher"):
        return PriorSpec.rademacher()
    if isinstance(spec, str):
        raise ConfigError(f"unknown prior name {spec!r} (use 'rademacher' or a dict)")
    if isinstance(spec, dict):
        kind = spec.get("kind", "three-point")
        if kind == "rademacher":
            return PriorSpec.rademacher()
        if kind == "three-point":
            return PriorSpec.three_point(float(spec.get("a", math.sqrt(3.0))))
        if kind == "discrete":
            return PriorSpec(tuple(spec["points"]), tuple(spec["probs"]))
        raise ConfigError(f"unknown prior kind {kind!r}")
    raise ConfigError(f"bad prior spec {spec!r}")


def parse_model(cfg: dict) -> ModelParams:
    """Build model params from a JSON config block."""
    if "model" not in cfg:
        raise ConfigError("config field 'model' is required")
    name = cfg["model"]
    try:
        if name == "submatrix":
            return SubmatrixParams(n=int(cfg["n"]), lam=float(cfg["lambda"]),
                                   rho=float(cfg["rho"]))
        if name == "pds":
            return PdsParams(n=int(cfg["n"]), rho=float(cfg["rho"]),
                             p0=float(cfg["p0"]), p1=float(cfg["p1"]))
        if name == "wigner":
            return WignerParams(n=int(cfg["n"]), m=int(cfg.get("m", 1)),
                                lam=float(cfg["lambda"]),
                                prior=_parse_prior(cfg.get("prior")))
        if name == "sbm":
            q = int(cfg["q"])
            return SbmParams(n=int(cfg["n"]), q=q,
                             pi=tuple(float(x) for x in cfg["pi"]),
                             Q=tuple(tuple(float(x) for x in row) for row in cfg["Q"]))
    except KeyError as exc:
        raise ConfigError(f"model {name!r}: missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"model {name!r}: {exc}") from exc
    raise ConfigError(f"unknown model {name!r}")


def _model_columns(params: ModelParams) -> dict:
    if isinstance(params, SubmatrixParams):
        return {"model": "submatrix", "n": params.n, "lambda": params.lam, "rho": params.rho}
    if isinstance(params, PdsParams):
        return {"model": "pds", "n": params.n, "rho": params.rho,
                "p0": params.p0, "p1": params.p1, "lambda": params.lam}
    if isinstance(params, WignerParams):
        return {"model": "wigner", "n": params.n, "m": params.m, "lambda": params.lam}
    return {"model": "sbm", "n": params.n, "q": params.q}


def _threshold_columns(params: ModelParams) -> dict:
    out = {}
    if isinstance(params, SubmatrixParams):
        if 0.0 < params.rho < 1.0:
            f = threshold_flags("submatrix", rho=params.rho, n=params.n, lam=params.lam)
            out = {"amp_threshold": f["amp_threshold"], "below_amp": f["below_amp"]}
    elif isinstance(params, PdsParams):
        f = threshold_flags("pds", rho=params.rho, n=params.n, p0=params.p0, p1=params.p1) \
            if 0.0 < params.rho < 1.0 else None
        if f:
            out = {"amp_threshold": f["amp_threshold"], "below_amp": f["below_amp"]}
    elif isinstance(params, WignerParams):
        f = threshold_flags("wigner", lam=params.lam)
        out = {"bbp_gap": f["bbp_gap"], "below_bbp": f["below_bbp"]}
    else:
        f = threshold_flags("sbm", pi=params.pi, Q=params.Q)
        out = {"ks": f["ks"], "below_ks": f["below_ks"]}
    return out


# ---------------------------------------------------------------------------
# Single-shot subcommands
# ---------------------------------------------------------------------------

def cmd_enumerate(cfg: dict, out) -> None:
    spec = GraphClassSpec(
        cls=cfg["class"], n=int(cfg["n"]),
        max_edges=int(cfg["max_edges"]) if cfg.get("max_edges") is not None else None,
        k=int(cfg["k"]) if cfg.get("k") is not None else None,
        D=int(cfg["D"]) if cfg.get("D") is not None else None,
        parallel_edges=cfg.get("parallel_edges"), self_loops=cfg.get("self_loops"))
    for g in enumerate_class(spec):
        out.write(g.to_line() + "\n")


def cmd_sample(cfg: dict, seed: int, out_path: str) -> None:
    params = parse_model(cfg)
    smp = sample(params, seed, stream=int(cfg.get("stream", 0)))
    ypath, lpath = dump_sample(smp, params, out_path)
    print(f"wrote {ypath} and {lpath}", file=sys.stderr)


def cmd_oracle(cfg: dict) -> list[dict]:
    params = parse_model(cfg)
    degrees = cfg.get("D", 2)
    if not isinstance(degrees, list):
        degrees = [degrees]
    pair = tuple(cfg["pair"]) if cfg.get("pair") else None
    rows = []
    for D in degrees:
        gs = build_gram(params, int(D), pair=pair)
        res = exact_corr(gs)
        row = _model_columns(params)
        row.update({"D": int(D), "corr": res.corr, "mmse": res.mmse,
                    "basis_size": res.basis_size, "gram_rank": res.gram_rank})
        if pair:
            row.update({"k0": pair[0], "l0": pair[1]})
        rows.append(row)
    return rows


ORACLE_COLUMNS = ["model", "n", "lambda", "rho", "p0", "p1", "m", "q", "k0", "l0",
                  "D", "corr", "mmse", "basis_size", "gram_rank"]


def cmd_certificate(cfg: dict) -> dict:
    params = parse_model(cfg)
    D = int(cfg.get("D", 2))
    pair = tuple(cfg["pair"]) if cfg.get("pair") else None
    cert = build_certificate(params, D, pair=pair)
    tol = float(cfg.get("residual_tol", 1e-8))
    record = {
        "model": cert.model,
        "params": {k: v for k, v in _model_columns(params).items() if k != "model"},
        "D": D,
        "residual": cert.residual,
        "bound": cert.bound,
        "support": sum(1 for v in cert.u.values() if v),
        "pass": cert.residual <= tol,
    }
    if isinstance(params, SbmParams):
        record["params"]["pi"] = list(params.pi)
        record["params"]["Q"] = [list(r) for r in params.Q]
        record["estimand_pair"] = list(cert.estimand_pair)
    if cfg.get("with_oracle"):
        oc = exact_corr(build_gram(params, D, pair=pair))
        record["oracle_corr"] = oc.corr
        record["pass"] = bool(record["pass"] and cert.bound >= oc.corr - 1e-9)
    return record


def cmd_cumulants(cfg: dict) -> list[dict]:
    n = int(cfg.get("n", 4))
    D = int(cfg.get("D", 3))
    lam = float(cfg.get("lambda", 1.0))
    m = int(cfg.get("m", 1))
    prior = _parse_prior(cfg.get("prior"))
    rows = []
    for alpha in enumerate_class(GraphClassSpec("good-SW", n=n, max_edges=D)):
        if alpha.edge_count == 0:
            continue
        k = kappa(alpha, prior, lam, n, m)
        bound = m * kappa_upper_bound(alpha, prior, lam, n)
        rows.append({
            "alpha_canonical": alpha.to_line(),
            "kappa": k,
            "f": f_value(alpha),
            "bound_rhs": bound,
            "pass": abs(k) <= bound + 1e-15 and f_value(alpha) <= f_upper_bound(alpha),
        })
    return rows


CUMULANT_COLUMNS = ["alpha_canonical", "kappa", "f", "bound_rhs", "pass"]


def cmd_thresholds(cfg: dict) -> dict:
    params = parse_model(cfg)
    if isinstance(params, SubmatrixParams):
        return threshold_flags("submatrix", rho=params.rho, n=params.n, lam=params.lam)
    if isinstance(params, PdsParams):
        return threshold_flags("pds", rho=params.rho, n=params.n,
                               p0=params.p0, p1=params.p1)
    if isinstance(params, WignerParams):
        return threshold_flags("wigner", lam=params.lam)
    return threshold_flags("sbm", pi=params.pi, Q=params.Q)


def cmd_estimate(cfg: dict, seed: int) -> list[dict]:
    params = parse_model(cfg)
    kind = cfg["kind"]
    order = int(cfg["k"]) if kind.startswith("tree") else int(cfg["D"])
    spec = EstimatorSpec(kind, order, params)
    trials = int(cfg.get("trials", 1000))
    res = mc_correlation(spec, trials, seed)
    row = _model_columns(params)
    row.update({
        "kind": kind, "D_or_k": order,
        "efx_mc": res.efx, "efx_se": res.efx_se,
        "efx_analytic": first_moment(spec),
        "ef2_mc": res.ef2, "ef2_se": res.ef2_se,
        "corr_mc": res.corr, "corr_se": res.corr_se,
        "trials": trials, "seed": seed,
    })
    return [row]


ESTIMATE_COLUMNS = ["model", "kind", "n", "D_or_k", "lambda", "rho", "p0", "p1", "m", "q",
                    "efx_mc", "efx_se", "efx_analytic", "ef2_mc", "ef2_se",
                    "corr_mc", "corr_se", "trials", "seed"]


# ---------------------------------------------------------------------------
# Sweep
# ---------------------------------------------------------------------------

MAX_GRID_POINTS = 10_000

_AXIS_FIELDS = {"lambda", "rho", "p0", "p1", "m", "n", "q", "D", "k", "trials", "k0", "l0"}


def _apply_axes(cfg: dict, assignment: dict) -> dict:
    out = json.loads(json.dumps(cfg))  # deep copy
    model = out.get("model", {})
    for key, val in assignment.items():
        if key in ("D", "k", "trials", "k0", "l0"):
            out[key] = val
        elif key in ("lambda", "rho", "p0", "p1", "m", "n", "q"):
            model[key] = val
        else:
            raise ConfigError(f"grid axis {key!r} does not name a parameter")
    out["model"] = model
    return out


def _sweep_point(args: tuple) -> dict:
    cfg, task, index, seed = args
    row = {"grid_index": index, "stream": index, "task": task, "seed": seed, "error": ""}
    try:
        params = parse_model(cfg["model"])
        row.update(_model_columns(params))
        row.update(_threshold_columns(params))
        if task == "estimate":
            kind = cfg["kind"]
            order = int(cfg["k"]) if kind.startswith("tree") else int(cfg["D"])
            row["kind"] = kind
            row["D" if not kind.startswith("tree") else "k"] = order
            spec = EstimatorSpec(kind, order, params)
            # stream block (index << 32) + trial: grid points never share streams
            res = mc_correlation(spec, int(cfg.get("trials", 1000)), seed,
                                 stream_base=index << 32)
            row.update({"trials": res.trials, "efx_mc": res.efx, "efx_se": res.efx_se,
                        "efx_analytic": first_moment(spec), "ef2_mc": res.ef2,
                        "ef2_se": res.ef2_se, "corr_mc": res.corr, "corr_se": res.corr_se})
        elif task == "certificate":
            D = int(cfg.get("D", 2))
            row["D"] = D
            pair = tuple(cfg["pair"]) if cfg.get("pair") else None
            cert = build_certificate(params, D, pair=pair)
            row.update({"cert_residual": cert.residual, "cert_bound": cert.bound})
            if cfg.get("with_oracle"):
                oc = exact_corr(build_gram(params, D, pair=pair))
                row.update({"oracle_corr": oc.corr, "oracle_mmse": oc.mmse})
        elif task == "oracle":
            D = int(cfg.get("D", 2))
            row["D"] = D
            pair = tuple(cfg["pair"]) if cfg.get("pair") else None
            oc = exact_corr(build_gram(params, D, pair=pair))
            row.update({"oracle_corr": oc.corr, "oracle_mmse": oc.mmse})
        elif task == "analytic":
            D = int(cfg.get("D", 2))
            row["D"] = D
            rec = analytic_bounds(params, D)
            if "envelope" in rec:
                row["envelope"] = rec["envelope"]
            if "sum_ks" in rec:
                row["sum_ks"] = rec["sum_ks"]
            if "corr_bound" in rec and rec["corr_bound"] != math.inf:
                row["cert_bound"] = rec["corr_bound"]
        else:
            raise ConfigError(f"unknown sweep task {task!r}")
    except (GuardError, ConfigError, ValueError) as exc:
        row["error"] = str(exc).replace(",", ";")
    return row


def run_sweep(cfg: dict, jobs: int = 1, plot: bool = False) -> str:
    """Execute a sweep config, write the CSV (atomically), return the path."""
    task = cfg.get("task", "estimate")
    out_path = cfg.get("out")
    if not out_path:
        raise ConfigError("sweep config needs an 'out' path")
    seed = int(cfg.get("seed", 0))
    grid = cfg.get("grid", {})
    for key in grid:
        if key not in _AXIS_FIELDS:
            raise ConfigError(f"grid axis {key!r} does not name a sweepable parameter")
    axes = list(grid.items())
    values = [v for _, v in axes]
    points = list(itertools.product(*values)) if axes else [()]
    if len(points) > int(cfg.get("grid_cap", MAX_GRID_POINTS)):
        raise ConfigError(f"grid of {len(points)} points exceeds the cap")
    tasks = []
    for index, point in enumerate(points):
        assignment = {k: v for (k, _), v in zip(axes, point)}
        sub = _apply_axes(cfg, assignment)
        tasks.append((sub, task, index, seed))
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(t) for t in tasks]
    rows.sort(key=lambda r: r["grid_index"])
    write_csv_atomic(out_path, SWEEP_COLUMNS, rows)
    if plot or cfg.get("plot"):
        from .plotting import render_sweep_plot
        x_col = cfg.get("plot_x") or (axes[0][0] if axes else "grid_index")
        y_cols = cfg.get("plot_y") or [c for c in
                                       ("corr_mc", "cert_bound", "oracle_corr", "envelope", "sum_ks")
                                       if any(r.get(c) not in (None, "") for r in rows)]
        if isinstance(y_cols, str):
            y_cols = [y_cols]
        threshold = cfg.get("plot_threshold")
        if threshold is None:
            vals = {r.get("amp_threshold") for r in rows} - {None, ""}
            if len(vals) == 1:
                threshold = vals.pop()
            elif x_col == "lambda" and any(r.get("bbp_gap") not in (None, "") for r in rows):
                threshold = 1.0  # the rank-one spectral transition
        svg = os.path.splitext(out_path)[0] + ".svg"
        render_sweep_plot(rows, x_col, y_cols, svg, threshold=threshold,
                          title=f"{task} sweep")
    return out_path


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def cmd_verify(include_invariants: bool = True) -> int:
    from .verification import run_all
    results = run_all(include_invariants=include_invariants)
    width = max(len(r.name) for r in results)
    failures = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.name:<{width}}  [{r.seconds:6.1f}s]  {r.detail}")
        failures += 0 if r.passed else 1
    total = sum(r.seconds for r in results)
    print(f"\n{len(results) - failures}/{len(results)} checks passed in {total:.1f}s")
    return 0 if failures == 0 else 1


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path}: line {exc.lineno} col {exc.colno}: {exc.msg}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lowdeg",
        description="Desk-scale toolkit for low-degree polynomial estimation in planted models")
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int, default=None, help="unsigned 64-bit seed (overrides config)")
    parser.add_argument("--out", help="output path")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    parser.add_argument("--plot", action="store_true", help="render an SVG next to the CSV")
    sub = parser.add_subparsers(dest="command", required=True)
    enum = sub.add_parser("enumerate", help="list a graph class, one graph per line")
    enum.add_argument("--class", dest="cls", help="graph class name")
    enum.add_argument("--n", type=int)
    enum.add_argument("--max-edges", type=int, dest="max_edges")
    enum.add_argument("--k", type=int)
    enum.add_argument("--D", type=int)
    for name in ("sample", "oracle", "certificate", "cumulants", "estimate",
                 "thresholds", "sweep"):
        sub.add_parser(name, help=f"run the {name} task from --config")
    ver = sub.add_parser("verify", help="run the acceptance and invariant suite")
    ver.add_argument("--criteria-only", action="store_true",
                     help="skip the extra module invariants")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.out:
            cfg["out"] = args.out
        if args.command == "enumerate":
            for field in ("cls", "n", "max_edges", "k", "D"):
                val = getattr(args, field, None)
                if val is not None:
                    cfg["class" if field == "cls" else field] = val
            if "class" not in cfg:
                raise ConfigError("enumerate needs --class or a config with 'class'")
            if args.out:
                with open(args.out, "w", encoding="ascii") as fh:
                    cmd_enumerate(cfg, fh)
            else:
                cmd_enumerate(cfg, sys.stdout)
        elif args.command == "sample":
            if not cfg.get("out"):
                raise ConfigError("sample needs --out")
            cmd_sample(cfg, int(cfg.get("seed", 0)), cfg["out"])
        elif args.command == "oracle":
            rows = cmd_oracle(cfg)
            _emit_csv(cfg.get("out"), ORACLE_COLUMNS, rows)
        elif args.command == "certificate":
            record = cmd_certificate(cfg)
            _emit_json(cfg.get("out"), record)
        elif args.command == "cumulants":
            rows = cmd_cumulants(cfg)
            _emit_csv(cfg.get("out"), CUMULANT_COLUMNS, rows)
        elif args.command == "thresholds":
            _emit_json(cfg.get("out"), cmd_thresholds(cfg))
        elif args.command == "estimate":
            rows = cmd_estimate(cfg, int(cfg.get("seed", 0)))
            _emit_csv(cfg.get("out"), ESTIMATE_COLUMNS, rows)
        elif args.command == "sweep":
            path = run_sweep(cfg, jobs=args.jobs, plot=args.plot)
            print(path, file=sys.stderr)
        elif args.command == "verify":
            return cmd_verify(include_invariants=not args.criteria_only)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except GuardError as exc:
        print(f"size guard: {exc}", file=sys.stderr)
        return 2
    return 0


def _emit_csv(out_path, columns, rows) -> None:
    if out_path:
        write_csv_atomic(out_path, columns, rows)
    else:
        sys.stdout.write(",".join(columns) + "\n")
        for row in rows:
            sys.stdout.write(",".join(_fmt(row.get(c)) for c in columns) + "\n")


def _json_default(x):
    import numpy as np
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON serializable: {type(x)}")


def _emit_json(out_path, record) -> None:
    text = json.dumps(record, indent=2, default=_json_default)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


if __name__ == "__main__":
    sys.exit(main())
