"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 numerical failure (unconverged,
singular or colliding spectra), 4 reproduction mismatch.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import reproduce as repro
from .analysis import EigenvalueCollisionError, SingularBlockError, derivative_tensors, hessian, spectral_report
from .arimoto import IterationSettings, analyze_at, solve_capacity
from .catalog import channel_names, get_channel, identity_channel
from .channel import ChannelError, kuhn_tucker_check, parse_vector, read_matrix, read_vector
from .numerics import NumericsError
from .plotting import line_chart
from .recurrence import ReductionError, build_reduced_model
from .serialize import dumps, fixed_point_dict, prediction_dict, reduced_dict, spectral_dict
from .speed import DEFAULT_DPS, predict_regime, run_trace

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_MISMATCH = 0, 2, 3, 4


class UsageError(Exception):
    """Bad command-line input; the message names the flag or file."""


def load_channel(source: str):
    """Matrix from a file path, a built-in name or ``identityK``."""
    path = Path(source)
    if path.is_file():
        return read_matrix(path)
    key = source.lower()
    if key in channel_names():
        return get_channel(key)
    if key.startswith("identity") and key[8:].isdigit() and int(key[8:]) >= 2:
        return identity_channel(int(key[8:]))
    raise UsageError(f"matrix: no such file or built-in channel {source!r} "
                     f"(built-ins: {', '.join(channel_names())}, identityK)")


def load_vector(source: str, flag: str, m: int) -> np.ndarray:
    """Vector from ``uniform``, a file, or an inline comma/space list."""
    if source == "uniform":
        return np.full(m, 1.0 / m)
    path = Path(source)
    try:
        vec = read_vector(path) if path.is_file() else parse_vector(source, source=flag)
    except ChannelError as exc:
        raise UsageError(f"{flag}: {exc}") from None
    if vec.size != m:
        raise UsageError(f"{flag}: expected {m} entries, got {vec.size}")
    return vec


def _settings(args) -> IterationSettings:
    try:
        return IterationSettings(max_iters=args.iters, fixed_point_tol=args.tol)
    except ValueError as exc:
        raise UsageError(f"--tol/--iters: {exc}") from None


def _fixed_point(args, channel):
    if args.at is not None:
        lam = load_vector(args.at, "--at", channel.m)
        try:
            return analyze_at(channel, lam, class_tol_nats=args.class_tol)
        except ChannelError as exc:
            raise UsageError(f"--at: {exc}") from None
    return solve_capacity(channel, _settings(args), class_tol_nats=args.class_tol)


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _warn(messages):
    for msg in messages:
        print(f"warning: {msg}", file=sys.stderr)


def cmd_capacity(args) -> int:
    channel = load_channel(args.matrix)
    fp = solve_capacity(channel, _settings(args), class_tol_nats=args.class_tol)
    kt = kuhn_tucker_check(fp.lambda_star, channel)
    payload = {"command": "capacity", "matrix": args.matrix, "fixed_point": fixed_point_dict(fp),
               "kuhn_tucker": {"max_violation": kt.max_violation, "support_spread": kt.support_spread}}
    _emit(dumps(payload), args.out)
    _warn(fp.warnings)
    if not fp.converged:
        print(f"error: {args.matrix}: solver did not converge", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _analysis_payload(args, channel, fp, lam0):
    payload = {"command": args.command, "matrix": args.matrix, "fixed_point": fixed_point_dict(fp)}
    try:
        tensors = derivative_tensors(fp, channel)
        spectral = spectral_report(fp, tensors)
        hess = hessian(fp, tensors)
        model = build_reduced_model(fp, spectral, tensors, hess) if fp.m2 else None
    except EigenvalueCollisionError as exc:
        payload["error"] = {"kind": "eigenvalue_collision", "message": str(exc)}
        return payload, None
    except SingularBlockError as exc:
        payload["error"] = {"kind": "singular_A1", "message": str(exc)}
        return payload, None
    except (NumericsError, ReductionError, ChannelError) as exc:
        payload["error"] = {"kind": "numerical", "message": str(exc)}
        return payload, None
    pred = predict_regime(fp, spectral, model, lam0=lam0, channel=channel)
    return payload, (spectral, hess, model, pred)


def cmd_analyze(args) -> int:
    channel = load_channel(args.matrix)
    fp = _fixed_point(args, channel)
    lam0 = None if args.init is None else load_vector(args.init, "--init", channel.m)
    payload, parts = _analysis_payload(args, channel, fp, lam0)
    if parts is not None:
        spectral, hess, model, pred = parts
        payload["spectral"] = spectral_dict(spectral, fp)
        payload["hessian"] = hess
        payload["reduced_model"] = None if model is None else reduced_dict(model)
        payload["prediction"] = prediction_dict(pred)
    payload["warnings"] = list(fp.warnings) + ([] if parts is None or parts[2] is None else list(parts[2].warnings))
    _emit(dumps(payload), args.out)
    _warn(payload["warnings"])
    if "error" in payload:
        print(f"error: {args.matrix}: {payload['error']['message']}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK if fp.converged else EXIT_NUMERICAL


def cmd_predict(args) -> int:
    channel = load_channel(args.matrix)
    fp = _fixed_point(args, channel)
    lam0 = None if args.init is None else load_vector(args.init, "--init", channel.m)
    payload, parts = _analysis_payload(args, channel, fp, lam0)
    if parts is not None:
        payload["prediction"] = prediction_dict(parts[3])
        del payload["fixed_point"]
        payload["capacity"] = fp.capacity
        payload["lambda_star"] = fp.lambda_star
    _emit(dumps(payload), args.out)
    _warn(fp.warnings)
    return EXIT_NUMERICAL if "error" in payload else EXIT_OK


def cmd_trace(args) -> int:
    channel = load_channel(args.matrix)
    lam0 = load_vector(args.init or "uniform", "--init", channel.m)
    if np.any(lam0 <= 0):
        raise UsageError("--init: the initial distribution must be strictly positive")
    if args.iters < 1:
        raise UsageError("--iters: trace length must be at least 1")
    fp = _fixed_point(args, channel) if args.at is not None else solve_capacity(
        channel, IterationSettings(fixed_point_tol=args.tol), class_tol_nats=args.class_tol)
    tr = run_trace(channel, lam0, fp, args.iters, dps=args.dps or None, channel_name=args.matrix)
    text = tr.to_csv()
    if args.csv:
        Path(args.csv).write_text(text)
    else:
        sys.stdout.write(text)
    if args.svg:
        Path(args.svg).write_text(line_chart(tr.n[1:], {"L(N)": tr.L[1:]}, title=f"{args.matrix}: L(N)",
                                             x_label="N", y_label="L(N)"))
    if args.out:
        last = args.iters
        summary = {"command": "trace", "matrix": args.matrix, "lambda0": lam0, "lambda_star": tr.lam_star,
                   "reference": tr.reference, "capacity": tr.capacity, "dps": tr.dps, "n": last,
                   "L": tr.L[last], "n_mu": tr.n_mu[last], "n2_gap": last * last * tr.gap[last],
                   "mi_exponent": tr.rate_exponent()[last]}
        Path(args.out).write_text(dumps(summary))
    return EXIT_OK


def _series_csv(series) -> str:
    names = list(series.columns)
    lines = [",".join([series.x_label] + names)]
    for k in range(series.x.size):
        x = float(series.x[k])
        cells = [str(int(x)) if x.is_integer() else repr(x)]
        cells += [repr(float(series.columns[c][k])) for c in names]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def cmd_reproduce(args) -> int:
    try:
        names = repro.expand_targets(args.target)
    except KeyError as exc:
        raise UsageError(f"target: {exc.args[0]}") from None
    if args.jobs < 1:
        raise UsageError("--jobs: must be at least 1")
    results = repro.run_targets(names, jobs=args.jobs)
    sys.stdout.write(repro.format_table(results))
    for flag, directory in (("csv", args.csv), ("svg", args.svg)):
        if directory is None:
            continue
        outdir = Path(directory)
        outdir.mkdir(parents=True, exist_ok=True)
        for res in results:
            for s in res.series:
                path = outdir / f"{res.target}_{s.name}.{flag}"
                if flag == "csv":
                    path.write_text(_series_csv(s))
                else:
                    path.write_text(line_chart(s.x, s.columns, title=f"{res.target}: {s.y_label}",
                                               x_label=s.x_label, y_label=s.y_label))
    if args.out:
        payload = {"command": "reproduce", "targets": [
            {"target": r.target, "passed": r.passed,
             "anchors": [{"quantity": a.quantity, "expected": a.expected, "computed": a.computed,
                          "tol": a.tol, "relative": a.relative, "passed": a.passed} for a in r.anchors]}
            for r in results]}
        Path(args.out).write_text(dumps(payload))
    return EXIT_OK if all(r.passed for r in results) else EXIT_MISMATCH


def cmd_plot(args) -> int:
    path = Path(args.csv_file)
    if not path.is_file():
        raise UsageError(f"csv_file: no such file {args.csv_file!r}")
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise UsageError(f"{args.csv_file}: no data rows")
    header = rows[0]
    x_col = args.x or header[0]
    wanted = args.columns.split(",") if args.columns else [c for c in ("L_N",) if c in header] or header[1:2]
    for name in [x_col] + wanted:
        if name not in header:
            raise UsageError(f"--columns/--x: column {name!r} not in {args.csv_file} (have {', '.join(header)})")
    try:
        data = np.array([[float(v) for v in row] for row in rows[1:]])
    except ValueError as exc:
        raise UsageError(f"{args.csv_file}: {exc}") from None
    x = data[:, header.index(x_col)]
    cols = {c: data[:, header.index(c)] for c in wanted}
    svg = line_chart(x, cols, title=args.title or path.stem, x_label=x_col, y_label=", ".join(wanted))
    _emit(svg, args.svg)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="arimoto-speed",
                                     description="Convergence-speed analysis of the Arimoto-Blahut algorithm.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, iters_default, iters_help):
        p.add_argument("matrix", help="matrix file, built-in name (phi1..phi5, phi2_exact, phi5_exact) or identityK")
        p.add_argument("--tol", type=float, default=1e-14, help="solver step tolerance (default 1e-14)")
        p.add_argument("--iters", type=int, default=iters_default, help=iters_help)
        p.add_argument("--class-tol", type=float, default=None,
                       help="divergence gap in nats below which a zero-mass symbol is type II")
        p.add_argument("--out", help="write JSON here instead of stdout")

    p = sub.add_parser("capacity", help="solve for the capacity-achieving distribution")
    common(p, 1_000_000, "solver iteration budget")
    p.set_defaults(func=cmd_capacity)

    for name, func, helptext in (("analyze", cmd_analyze, "full fixed-point analysis as JSON"),
                                 ("predict", cmd_predict, "predicted convergence regime")):
        p = sub.add_parser(name, help=helptext)
        common(p, 1_000_000, "solver iteration budget")
        p.add_argument("--at", help="treat this distribution (file or list) as the optimum")
        p.add_argument("--init", help="initial distribution for the b_max test: uniform, file or list")
        p.set_defaults(func=func)

    p = sub.add_parser("trace", help="record a convergence trace as CSV")
    common(p, 500, "trace length N_max (default 500)")
    p.add_argument("--at", help="reference optimum (file or list); solved when omitted")
    p.add_argument("--init", help="initial distribution: uniform (default), file or list")
    p.add_argument("--dps", type=int, default=DEFAULT_DPS,
                   help=f"decimal digits for the extended-precision run; 0 for double (default {DEFAULT_DPS})")
    p.add_argument("--csv", help="write the CSV here instead of stdout")
    p.add_argument("--svg", help="also write an L(N) chart")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("reproduce", help="check the reference anchors")
    p.add_argument("target", help=f"all, or a comma-separated list of: {', '.join(repro.TARGETS)}")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for independent targets")
    p.add_argument("--csv", help="directory for series CSV files")
    p.add_argument("--svg", help="directory for SVG charts")
    p.add_argument("--out", help="write a JSON summary here")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("plot", help="draw columns of a CSV file as an SVG line chart")
    p.add_argument("csv_file")
    p.add_argument("--columns", help="comma-separated y columns (default L_N)")
    p.add_argument("--x", help="x column (default: first column)")
    p.add_argument("--title")
    p.add_argument("--svg", help="output file (default stdout)")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "class_tol", 0) is None:
        # solver default is tight; a supplied optimum is rounded, so it gets a looser one
        solved = args.command == "capacity" or getattr(args, "at", None) is None
        args.class_tol = 1e-6 if solved else 1e-2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ChannelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_INVALID
    except ArithmeticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
