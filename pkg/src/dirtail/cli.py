"""Command-line interface: ``dirtail <command> [options]``.

Exit codes: 0 success, 1 failed validation, 2 configuration error, 3 numerical
failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys

from .asymptotics import density_thm, tail_saddlepoint, tail_thm
from .constants import asymptotic_constants
from .distributions import load_spec
from .errors import ConfigError, NumericError
from .montecarlo import McConfig, estimate_tail, local_clt_report
from .oracle import enumerate_tail
from .saddle import solve_t
from .series import check_alpha, mean_series
from .validate import report_dict, run_checks

SCHEMA = 1
SWEEP_COLUMNS = ["x", "t", "log_tail_thm", "log_tail_saddle", "log_tail_mc", "mc_se",
                 "oracle_lower", "oracle_upper"]

log = logging.getLogger("dirtail")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _k_trunc(text):
    if text == "auto":
        return "auto"
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("k-trunc must be an integer or 'auto'") from None
    if k < 1:
        raise argparse.ArgumentTypeError("k-trunc must be positive")
    return k


def _grid(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("grid must be a comma-separated list of numbers") from None
    return vals


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dist", default="rademacher",
                        help="preset (rademacher, uniform, gaussian), family or TOML path")
    common.add_argument("--b", type=float, default=None, help="right edge for a family")
    common.add_argument("--theta", type=float, default=None, help="atom mass for two_point")
    common.add_argument("--r", type=float, default=None, help="edge exponent for poly_edge")
    common.add_argument("--alpha", type=float, default=1.0)
    common.add_argument("--out", choices=("json", "csv"), default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)

    p = _Parser(prog="dirtail", description="Tail asymptotics of random Dirichlet series.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("constants", parents=[common], help="asymptotic constants")
    s = sub.add_parser("solve-t", parents=[common], help="solve M(t) = x")
    s.add_argument("--x", type=float, required=True)
    s = sub.add_parser("tail", parents=[common], help="log tail probability")
    s.add_argument("--x", type=float, required=True)
    s.add_argument("--method", choices=("thm", "saddle"), default="thm")
    s = sub.add_parser("density", parents=[common], help="asymptotic log density")
    s.add_argument("--x", type=float, required=True)
    s = sub.add_parser("simulate", parents=[common], help="importance-sampling tail estimate")
    s.add_argument("--x", type=float, required=True)
    s.add_argument("--n", type=int, default=100_000)
    s.add_argument("--k-trunc", type=_k_trunc, default="auto")
    s.add_argument("--target", choices=("truncated", "series", "gaussian_remainder"), default="truncated")
    s = sub.add_parser("oracle", parents=[common], help="exact enumeration of a truncated sum")
    s.add_argument("--x", type=float, required=True)
    s.add_argument("--k", type=int, required=True)
    s = sub.add_parser("local-clt", parents=[common], help="local CLT diagnostic")
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--n", type=int, default=100_000)
    s.add_argument("--k-trunc", type=_k_trunc, default="auto")
    s = sub.add_parser("sweep", parents=[common], help="all methods over a grid")
    s.add_argument("--grid", type=_grid, required=True, help="comma-separated ascending values")
    s.add_argument("--grid-kind", choices=("x", "t"), default="x")
    s.add_argument("--mc-n", type=int, default=0, help="Monte Carlo samples per point (0 skips)")
    s.add_argument("--oracle-k", type=int, default=0, help="enumeration depth (0 skips)")
    sub.add_parser("validate", parents=[common], help="run the cross-check suite")
    return p


def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item"):
        return _clean(obj.item())
    return obj


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, list):
            out[key] = ";".join("" if e is None else repr(e) for e in v)
        else:
            out[key] = v
    return out


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, float) else v) for v in row])
    return buf.getvalue()


def _emit(payload, fmt, stream):
    payload = _clean(payload)
    if fmt == "csv":
        flat = _flatten(payload)
        stream.write(_csv_text(list(flat), [list(flat.values())]))
    else:
        stream.write(json.dumps(payload, indent=2, allow_nan=False) + "\n")


def _envelope(args, spec, alpha, body):
    return {"schema": SCHEMA, "command": args.command, "dist": spec.to_dict(), "alpha": alpha, **body}


def _value_or_null(log_value):
    return math.exp(log_value) if log_value >= -700 else None


def sweep(spec, alpha, grid, *, grid_kind="x", mc_n=0, oracle_k=0, seed=0, threads=1):
    """One row per grid point with every applicable method; missing methods are ``None``."""
    if not grid:
        raise ConfigError("grid must not be empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("grid must be strictly ascending")
    if any(not math.isfinite(v) or v < 0 for v in grid):
        raise ConfigError("grid values must be finite and non-negative")
    rows = []
    for v in grid:
        if grid_kind == "t":
            t, x = v, mean_series(spec, alpha, v).value
        else:
            x = v
            t = solve_t(spec, alpha, x).t
        row = {c: None for c in SWEEP_COLUMNS}
        row["x"], row["t"] = x, t
        if spec.edge and x > 0:
            try:
                row["log_tail_thm"] = tail_thm(spec, alpha, x).log_value
            except NumericError as exc:
                log.info("thm formula unavailable at x=%g: %s", x, exc)
        if spec.edge and x >= 2.0:
            row["log_tail_saddle"] = tail_saddlepoint(spec, alpha, x).log_value
        if mc_n > 0:
            r = estimate_tail(spec, alpha, x, McConfig(mc_n, "auto", seed, threads),
                              target="gaussian_remainder")
            row["log_tail_mc"] = r.log_estimate if math.isfinite(r.log_estimate) else None
            row["mc_se"] = r.std_error_of_log if math.isfinite(r.std_error_of_log) else None
        if oracle_k > 0 and spec.kind in ("two_point", "discrete"):
            o = enumerate_tail(spec, alpha, x, oracle_k, threads=threads)
            row["oracle_lower"], row["oracle_upper"] = o.lower, o.upper
        rows.append(row)
    return rows


def _dispatch(args, out):
    spec = load_spec(args.dist, b=args.b, theta=args.theta, r=args.r)
    alpha = check_alpha(args.alpha)
    if args.threads < 1:
        raise ConfigError("threads must be at least 1")
    cmd = args.command
    fmt = args.out or ("csv" if cmd == "sweep" else "json")

    if cmd == "constants":
        body = asymptotic_constants(spec, alpha).to_dict()
        body.pop("alpha")
        _emit(_envelope(args, spec, alpha, body), fmt, out)
    elif cmd == "solve-t":
        _emit(_envelope(args, spec, alpha, solve_t(spec, alpha, args.x).to_dict()), fmt, out)
    elif cmd in ("tail", "density"):
        if cmd == "density":
            est = density_thm(spec, alpha, args.x)
        elif args.method == "thm":
            est = tail_thm(spec, alpha, args.x)
        else:
            est = tail_saddlepoint(spec, alpha, args.x)
        body = {"x": est.x, "method": est.method, "log_value": est.log_value,
                "value_or_null": _value_or_null(est.log_value)}
        _emit(_envelope(args, spec, alpha, body), fmt, out)
    elif cmd == "simulate":
        cfg = McConfig(args.n, args.k_trunc, args.seed, args.threads)
        r = estimate_tail(spec, alpha, args.x, cfg, target=args.target)
        _emit(_envelope(args, spec, alpha, {"x": args.x, **r.to_dict()}), fmt, out)
    elif cmd == "oracle":
        o = enumerate_tail(spec, alpha, args.x, args.k, threads=args.threads)
        _emit(_envelope(args, spec, alpha, o.to_dict()), fmt, out)
    elif cmd == "local-clt":
        cfg = McConfig(args.n, args.k_trunc, args.seed, args.threads)
        r = local_clt_report(spec, alpha, args.t, cfg)
        _emit(_envelope(args, spec, alpha, r.to_dict()), fmt, out)
    elif cmd == "sweep":
        rows = sweep(spec, alpha, args.grid, grid_kind=args.grid_kind, mc_n=args.mc_n,
                     oracle_k=args.oracle_k, seed=args.seed, threads=args.threads)
        if fmt == "csv":
            out.write(_csv_text(SWEEP_COLUMNS, [[r[c] for c in SWEEP_COLUMNS] for r in rows]))
        else:
            _emit(_envelope(args, spec, alpha, {"columns": SWEEP_COLUMNS, "rows": rows}), fmt, out)
    elif cmd == "validate":
        report = report_dict(run_checks(spec, alpha, args.seed, args.threads))
        _emit(_envelope(args, spec, alpha, report), fmt, out)
        return 0 if report["passed"] else 1
    return 0


def _setup_logging():
    level = os.environ.get("DIRTAIL_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def run(argv=None, out=None):
    """Parse ``argv``, run the command and return the exit code."""
    out = out or sys.stdout
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _dispatch(args, out)
    except ConfigError as exc:
        print(f"dirtail: configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"dirtail: numerical failure: {exc}", file=sys.stderr)
        return 3


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
