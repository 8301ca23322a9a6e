"""Command-line interface: ``rpsparse {fit,path,simulate,influence}``.

Input CSVs have a header row, the response in the first column and the
predictors after it. Results are written as JSON (fits) and CSV (tables).

Exit status: 0 on success, 1 on a usage or input error, 2 when the
requested fit stopped at the iteration cap (the result is still written).
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .data import FitResult, standardize
from .exceptions import ConstantColumnError, NotConvergedWarning, RpSparseError
from .influence import IfSetting, boundedness_report, if_table, write_if_csv
from .path import fit_path, hbic
from .penalties import Family, PenaltySpec
from .simulation import (
    Method,
    ScenarioSpec,
    XOutliers,
    YOutliers,
    generate,
    run_scenario,
    write_raw_csv,
    write_replicates_csv,
    write_series_csv,
    write_summary_csv,
)
from .solver import SolverConfig, fit

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NOT_CONVERGED = 2


class InputError(Exception):
    """Problem with user input; reported on stderr with exit status 1."""


def read_csv(path):
    """Read a numeric CSV with a header; returns (x, y, predictor names)."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot open {path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: file is empty") from None
        if len(header) < 2:
            raise InputError(f"{path}, line 1: need a response column and at least one predictor")
        rows = []
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise InputError(f"{path}, line {line}: expected {len(header)} fields, got {len(row)}")
            vals = []
            for col, cell in enumerate(row, start=1):
                try:
                    v = float(cell)
                except ValueError:
                    raise InputError(
                        f"{path}, line {line}, column {col} ({header[col - 1]}): "
                        f"cannot parse {cell!r} as a number") from None
                if not np.isfinite(v):
                    raise InputError(f"{path}, line {line}, column {col} ({header[col - 1]}): non-finite value")
                vals.append(v)
            rows.append(vals)
    if len(rows) < 2:
        raise InputError(f"{path}: need at least 2 data rows, got {len(rows)}")
    data = np.array(rows)
    return data[:, 1:], data[:, 0], [h.strip() for h in header[1:]]


def load_dataset(path):
    x, y, names = read_csv(path)
    try:
        return standardize(x, y, column_names=names)
    except ConstantColumnError as exc:
        raise InputError(f"{path}: predictor column '{exc.name}' is constant") from None


def _penalty(args, lam) -> PenaltySpec:
    fam = Family(args.family)
    a = float("nan")
    if fam is Family.SCAD and args.scad_a is not None:
        a = args.scad_a
    if fam is Family.MCP and args.mcp_a is not None:
        a = args.mcp_a
    try:
        return PenaltySpec(fam, lam, a)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _config(args) -> SolverConfig:
    try:
        return SolverConfig(alpha=args.alpha, eps_outer=args.eps_outer, eps_inner=args.eps_inner,
                            max_outer=args.max_outer, max_inner=args.max_inner,
                            fit_intercept=not args.no_intercept)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def fit_document(res: FitResult, ds) -> dict:
    names = list(ds.column_names) if ds.column_names else [f"x{j + 1}" for j in range(ds.p)]
    return {
        "alpha": res.alpha,
        "lambda": res.lambda_,
        "family": res.family,
        "intercept": res.intercept,
        "beta": [float(b) for b in res.beta],
        "sigma": res.sigma,
        "active_set": [j + 1 for j in res.active_set],
        "n_iter": res.n_iter,
        "converged": res.converged,
        "objective": res.objective,
        "a": res.a,
        "active_names": [names[j] for j in res.active_set],
        "columns": names,
        "beta_std": [float(b) for b in res.beta_std],
        "intercept_std": res.intercept_std,
    }


def _write_json(doc, path):
    text = json.dumps(doc, indent=2, allow_nan=False) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_fit(args) -> int:
    if args.lambda_ is None:
        raise InputError("lambda required for fit (use the path command to select it by HBIC)")
    ds = load_dataset(args.input)
    spec = _penalty(args, args.lambda_)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NotConvergedWarning)
        res = fit(ds, spec, _config(args))
    _write_json(fit_document(res, ds), args.output)
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def cmd_path(args) -> int:
    ds = load_dataset(args.input)
    spec = _penalty(args, 0.0)
    if args.grid_size < 1:
        raise InputError("--grid-size must be >= 1")
    if not 0 < args.grid_ratio < 1:
        raise InputError("--grid-ratio must lie in (0, 1)")
    pr = fit_path(ds, args.alpha, spec.family, config=_config(args), a=spec.a,
                  k=args.grid_size, ratio=args.grid_ratio, init=args.init)
    if args.table:
        with open(args.table, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["lambda", "hbic", "df", "sigma", "objective", "converged"])
            for row in pr.table():
                w.writerow([repr(row["lambda_"]), repr(row["hbic"]),
                            "" if row["df"] is None else row["df"],
                            "" if row["sigma"] is None else repr(row["sigma"]),
                            "" if row["objective"] is None else repr(row["objective"]),
                            int(row["converged"])])
    doc = fit_document(pr.selected, ds)
    doc["hbic"] = hbic(pr.selected, ds.n, ds.p) if ds.n >= 3 and ds.p >= 2 else None
    doc["selected_index"] = pr.selected_index
    _write_json(doc, args.output)
    return EXIT_OK if pr.selected.converged else EXIT_NOT_CONVERGED


def _scenario(args, contamination_fraction=None, p=None) -> ScenarioSpec:
    kind = args.contamination
    frac = args.fraction if contamination_fraction is None else contamination_fraction
    if kind == "none":
        cont = None
    elif kind == "y":
        cont = YOutliers(frac, args.shift)
    else:
        cont = XOutliers(frac, args.shift, args.n_cols, args.x_rows)
    try:
        return ScenarioSpec(n=args.n, p=args.p if p is None else p, sigma0=args.sigma0, signal=args.signal,
                            contamination=cont, replications=args.replications, seed=args.seed)
    except (ValueError, RpSparseError) as exc:
        raise InputError(f"invalid scenario: {exc}") from None


def cmd_simulate(args) -> int:
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    spec = _scenario(args)
    try:
        methods = [Method(a, args.family) for a in args.alpha]
    except ValueError as exc:
        raise InputError(str(exc)) from None
    threads = args.threads or os.cpu_count() or 1
    kw = dict(threads=threads, grid_size=args.grid_size, grid_ratio=args.grid_ratio)

    res = run_scenario(spec, methods, **kw)
    write_summary_csv([res], out / "summary.csv")
    write_replicates_csv([res], out / "replicates.csv")

    if args.rmse_levels:
        rows = []
        for level in args.rmse_levels:
            r = run_scenario(_scenario(args, contamination_fraction=level), methods, **kw)
            rows += [(level, e["method"], e["rmse"]) for e in r.summary]
        write_series_csv(rows, ("contamination_level", "method", "rmse"), out / "rmse_by_contamination.csv")
    if args.rmse_p:
        rows = []
        for p in args.rmse_p:
            r = run_scenario(_scenario(args, p=p), methods, **kw)
            rows += [(p, e["method"], e["rmse"]) for e in r.summary]
        write_series_csv(rows, ("p", "method", "rmse"), out / "rmse_by_p.csv")
    if args.dump:
        rep = generate(spec, 0)
        write_raw_csv(rep.x_train, rep.y_train, out / "train.csv")
        write_raw_csv(rep.x_test, rep.y_test, out / "test.csv")
    flagged = [e["method"] for e in res.summary if e["flagged"]]
    if flagged:
        print(f"warning: more than 5% failed replicates for {', '.join(flagged)}", file=sys.stderr)
    return EXIT_OK


def cmd_influence(args) -> int:
    if args.fit:
        try:
            doc = json.loads(Path(args.fit).read_text(encoding="utf-8"))
            beta = np.asarray(doc["beta"], dtype=float)
            sigma = float(doc["sigma"])
            spec = PenaltySpec(doc["family"], doc["lambda"], doc.get("a", float("nan")))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise InputError(f"cannot read fit JSON {args.fit}: {exc}") from None
    else:
        if args.beta is None or args.sigma is None:
            raise InputError("influence needs --fit or both --beta and --sigma")
        beta = np.asarray(args.beta, dtype=float)
        sigma = args.sigma
        spec = _penalty(args, args.lambda_ or 0.0)
    p = beta.size
    idx = np.arange(p)
    exx = args.rho ** np.abs(idx[:, None] - idx[None, :])
    x_t = np.ones(p) if args.x_t is None else np.asarray(args.x_t, dtype=float)
    if x_t.shape != (p,):
        raise InputError(f"--x-t needs {p} values")
    try:
        setting = IfSetting(beta, sigma, args.alpha[0], exx, spec)
    except (ValueError, RpSparseError) as exc:
        raise InputError(str(exc)) from None
    u = np.linspace(-args.u_max, args.u_max, args.n_grid)
    try:
        rows = if_table(args.alpha, setting, u, x_t)
        report = boundedness_report(args.alpha, setting, x_t, u_max=args.u_max)
    except RpSparseError as exc:
        raise InputError(str(exc)) from None
    write_if_csv(rows, args.output)
    if args.report:
        _write_json(report, args.report)
    return EXIT_OK


def _add_common(p, need_lambda=False):
    p.add_argument("--alpha", type=float, default=0.0, help="RP tuning parameter (0 = likelihood)")
    p.add_argument("--family", choices=[f.value for f in Family], default="SCAD")
    p.add_argument("--scad-a", type=float, default=None, help="SCAD shape (default 3.7)")
    p.add_argument("--mcp-a", type=float, default=None, help="MCP shape (default 3)")
    p.add_argument("--eps-outer", type=float, default=1e-8)
    p.add_argument("--eps-inner", type=float, default=1e-8)
    p.add_argument("--max-outer", type=int, default=500)
    p.add_argument("--max-inner", type=int, default=1000)
    p.add_argument("--no-intercept", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rpsparse", description="Robust sparse regression with the RP loss.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit at a single lambda")
    p.add_argument("--input", required=True)
    p.add_argument("--output", default="-")
    p.add_argument("--lambda", dest="lambda_", type=float)
    _add_common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("path", help="fit a lambda path and select by HBIC")
    p.add_argument("--input", required=True)
    p.add_argument("--output", default="-", help="JSON of the selected fit")
    p.add_argument("--table", help="per-lambda CSV")
    p.add_argument("--grid-size", type=int, default=50)
    p.add_argument("--grid-ratio", type=float, default=0.01)
    p.add_argument("--init", choices=["pilot", "warm"], default="pilot")
    _add_common(p)
    p.set_defaults(func=cmd_path)

    p = sub.add_parser("simulate", help="run a simulation scenario")
    p.add_argument("--output-dir", required=True)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--p", type=int, default=100)
    p.add_argument("--sigma0", type=float, default=0.5)
    p.add_argument("--signal", choices=["StrongA", "WeakB"], default="StrongA")
    p.add_argument("--contamination", choices=["none", "y", "x"], default="none")
    p.add_argument("--fraction", type=float, default=0.1)
    p.add_argument("--shift", type=float, default=20.0)
    p.add_argument("--n-cols", type=int, default=10)
    p.add_argument("--x-rows", action="store_true",
                   help="X outliers: shift every covariate of the first n-cols rows instead")
    p.add_argument("--replications", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, nargs="+", default=[0.0, 0.1, 0.3, 0.5])
    p.add_argument("--family", choices=[f.value for f in Family], default="SCAD")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--grid-size", type=int, default=50)
    p.add_argument("--grid-ratio", type=float, default=0.01)
    p.add_argument("--rmse-levels", type=float, nargs="*", help="contamination fractions for an RMSE series")
    p.add_argument("--rmse-p", type=int, nargs="*", help="dimensions for an RMSE series")
    p.add_argument("--dump", action="store_true", help="write replicate 0 as train.csv / test.csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("influence", help="influence-function curves")
    p.add_argument("--fit", help="fit JSON written by the fit or path command")
    p.add_argument("--beta", type=float, nargs="+")
    p.add_argument("--sigma", type=float)
    p.add_argument("--lambda", dest="lambda_", type=float, default=None)
    p.add_argument("--alpha", type=float, nargs="+", default=[0.0, 0.1, 0.3, 0.5])
    p.add_argument("--family", choices=[f.value for f in Family], default="L1")
    p.add_argument("--scad-a", type=float, default=None)
    p.add_argument("--mcp-a", type=float, default=None)
    p.add_argument("--rho", type=float, default=0.0, help="E[XX'] = rho^|i-j| (0 gives the identity)")
    p.add_argument("--x-t", type=float, nargs="+")
    p.add_argument("--u-max", type=float, default=50.0)
    p.add_argument("--n-grid", type=int, default=201)
    p.add_argument("--output", required=True)
    p.add_argument("--report", help="JSON boundedness report")
    p.set_defaults(func=cmd_influence)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"rpsparse: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RpSparseError as exc:
        print(f"rpsparse: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
