"""Command-line interface.

Subcommands: ``alpha``, ``table1``, ``estimate``, ``blocks``, ``simulate``,
``oracle`` and ``counterexample``.  Exit codes: 0 success, 2 usage or
parameter error, 3 I/O error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import counterexample, estimators, oracle
from .errors import InsufficientDataError, NumericalError, ParameterError
from .garch_chain import ONE_SIDED, TWO_SIDED, sample_garch_tail_chain
from .tail_index import GarchParams, abs_normal_moment, solve_tail_index

DEFAULT_SEED = 42
EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERICAL = 0, 2, 3, 4


@dataclass
class RunConfig:
    """Validated view of the parsed arguments."""

    subcommand: str
    params: Optional[GarchParams]
    seed: Optional[int]
    output: Optional[str]
    fmt: Optional[str]
    workers: int

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        params = None
        if all(hasattr(args, k) for k in ("alpha0", "alpha1", "beta1")):
            params = GarchParams(args.alpha0, args.alpha1, args.beta1)
        workers = getattr(args, "workers", 1)
        if workers < 1:
            raise ParameterError(f"--workers must be >= 1, got {workers}")
        return cls(subcommand=args.command, params=params, seed=getattr(args, "seed", None),
                   output=getattr(args, "output", None), fmt=getattr(args, "format", None), workers=workers)


def _int_like(text):
    """Integer flag that also accepts ``1e7``-style input."""
    value = float(text)
    if not value.is_integer():
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    return int(value)


def _int_list(text):
    return [int(v) for v in str(text).split(",") if v.strip()]


def _rows(text):
    """``a1,b1`` pairs separated by ``;``."""
    out = []
    for chunk in str(text).split(";"):
        if not chunk.strip():
            continue
        parts = [float(v) for v in chunk.split(",")]
        if len(parts) != 2:
            raise argparse.ArgumentTypeError(f"row must be 'alpha1,beta1', got {chunk!r}")
        out.append(tuple(parts))
    return out


def _common(p, params=True, seed=True, output=True):
    p.add_argument("--config", help="flat key=value file with flag names; command-line flags win")
    if params:
        p.add_argument("--alpha0", type=float, default=estimators.TABLE1_ALPHA0,
                       help="GARCH level alpha0 > 0 (default %(default)g)")
        p.add_argument("--alpha1", type=float, default=0.15, help="ARCH coefficient alpha1 > 0 (default %(default)g)")
        p.add_argument("--beta1", type=float, default=0.84, help="GARCH coefficient beta1 >= 0 (default %(default)g)")
    if seed:
        p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="random seed (default %(default)s)")
        p.add_argument("--workers", type=int, default=1,
                       help="worker processes; results do not depend on it (default %(default)s)")
    if output:
        p.add_argument("--output", help="output file (default: standard output)")
        p.add_argument("--format", choices=("csv", "json"), default=None, help="output format")


def build_parser():
    parser = argparse.ArgumentParser(prog="tailchain", description="GARCH(1,1) tail-chain toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("alpha", help="solve the tail-index equation")
    _common(p, seed=False)

    p = sub.add_parser("table1", help="theta, chi(1..3), gamma(1..3) for a set of GARCH rows")
    _common(p, params=False)
    p.add_argument("--alpha0", type=float, default=estimators.TABLE1_ALPHA0, help="GARCH level (default %(default)g)")
    p.add_argument("--N", type=_int_like, default=10000, help="tail-chain paths per row (default %(default)s)")
    p.add_argument("--m", "-m", type=_int_like, default=estimators.DEFAULT_M,
                   help="horizon for theta and gamma, in time steps (default %(default)s)")
    p.add_argument("--rows", type=_rows, action="append",
                   help="'alpha1,beta1' (repeat, or separate with ';'); default: the seven reference rows")

    p = sub.add_parser("estimate", help="single theta, chi or gamma estimate")
    _common(p)
    p.add_argument("kind", choices=("theta", "chi", "gamma"))
    p.add_argument("--N", type=_int_like, default=10000, help="tail-chain paths (default %(default)s)")
    p.add_argument("--m", "-m", type=_int_like, default=estimators.DEFAULT_M,
                   help="horizon in time steps (default %(default)s)")
    p.add_argument("--h", type=_int_list, default=[1], help="comma-separated lags (default 1)")

    p = sub.add_parser("blocks", help="blocks estimator of the extremal index on a return file")
    _common(p, params=False, seed=False)
    p.add_argument("--input", required=True, help="CSV with one numeric column, optional header")
    p.add_argument("--block-len", type=_int_like, default=126, help="block length in observations (default %(default)s)")
    p.add_argument("--quantile", "--q", type=float, default=0.95,
                   help="threshold as empirical quantile in (0.5, 1) (default %(default)s)")
    p.add_argument("--method", choices=("ratio", "log"), default="ratio",
                   help="'ratio': exceeding blocks / exceedances; 'log': logarithmic correction (default %(default)s)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="bootstrap seed (default %(default)s)")

    p = sub.add_parser("simulate", help="one tail-chain path as CSV (t, sigma, zeta)")
    _common(p)
    p.add_argument("--m", "-m", type=_int_like, default=5, help="backward steps (default %(default)s)")
    p.add_argument("--n", "-n", type=_int_like, default=5, help="forward steps (default %(default)s)")
    p.add_argument("--conditioning", choices=(ONE_SIDED, TWO_SIDED), default=ONE_SIDED)

    p = sub.add_parser("oracle", help="finite-threshold estimates from a long simulated GARCH path")
    _common(p)
    p.add_argument("--len", dest="length", type=_int_like, default=10**7, help="path length after burn-in (default 1e7)")
    p.add_argument("--burn-in", type=_int_like, default=10**4, help="discarded initial steps (default 1e4)")
    p.add_argument("--quantile", "--q", type=float, default=0.999,
                   help="threshold as empirical quantile of zeta (default %(default)s)")
    p.add_argument("--m", "-m", type=_int_like, default=estimators.DEFAULT_M, help="horizon (default %(default)s)")
    p.add_argument("--h", type=_int_like, default=3, help="largest lag (default %(default)s)")
    p.add_argument("--N", type=_int_like, default=10000,
                   help="tail-chain paths for the comparison chi(1..h) (default %(default)s)")

    p = sub.add_parser("counterexample", help="conditional laws along c 5^i as CSV (c, b, probability)")
    _common(p, params=False, seed=False)
    p.add_argument("--c", type=float, default=3.0, help="level multiplier in [3, 5), or 1 (default %(default)s)")
    p.add_argument("--levels", type=_int_like, default=8, help="number of levels, >= 5 (default %(default)s)")
    return parser


def _subparser(parser, name):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def read_config(path) -> dict:
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.lstrip("-").replace("-", "_")] = value
    return out


def _apply_config(parser, argv, args):
    """Re-parse with config values as defaults so that explicit flags win."""
    sub = _subparser(parser, args.command)
    by_dest = {a.dest: a for a in sub._actions}
    aliases = {"q": "quantile", "len": "length", "block_len": "block_len"}
    defaults = {}
    for key, raw in read_config(args.config).items():
        dest = aliases.get(key, key)
        action = by_dest.get(dest)
        if action is None or dest in ("help", "config"):
            raise ParameterError(f"unknown config key {key!r}")
        value = action.type(raw) if action.type else raw
        if action.choices is not None and value not in action.choices:
            raise ParameterError(f"config {key}={raw!r} not in {sorted(action.choices)}")
        defaults[dest] = [value] if isinstance(action, argparse._AppendAction) else value
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _emit(text: str, output: Optional[str]):
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _params(args) -> GarchParams:
    return GarchParams(args.alpha0, args.alpha1, args.beta1)


def _json(obj) -> str:
    def default(o):
        if isinstance(o, GarchParams):
            return {"alpha0": o.alpha0, "alpha1": o.alpha1, "beta1": o.beta1}
        if isinstance(o, np.generic):
            return o.item()
        raise TypeError(type(o).__name__)

    return json.dumps(obj, indent=2, default=default) + "\n"


def cmd_alpha(args):
    ti = solve_tail_index(_params(args))
    if args.format == "json":
        _emit(_json({"alpha": ti.alpha, "two_alpha": ti.two_alpha, "residual": ti.residual}), args.output)
    else:
        _emit(f"{ti.alpha:.3f}\n", args.output)


def cmd_table1(args):
    rows = [r for group in args.rows for r in group] if args.rows else list(estimators.TABLE1_ROWS)

    def progress(row):
        print(f"alpha1={row.params.alpha1:g} beta1={row.params.beta1:g}: {row.seconds:.2f} s", file=sys.stderr)
        if row.gamma and row.gamma[0] is None:
            print(f"warning: gamma left empty, only {row.no_prior} paths without a past exceedance "
                  f"(need {estimators.MIN_CONDITIONING})", file=sys.stderr)

    result = estimators.table1(N=args.N, m=args.m, seed=args.seed, rows=rows, workers=args.workers,
                               alpha0=args.alpha0, progress=progress)
    if args.format == "json":
        _emit(_json([r.values() for r in result]), args.output)
    else:
        _emit(estimators.table1_csv(result), args.output)


def cmd_estimate(args):
    params = _params(args)
    alpha = solve_tail_index(params).alpha
    reports = []
    if args.kind == "theta":
        reports.append(estimators.estimate_theta(params, alpha, m=args.m, N=args.N, seed=args.seed,
                                                 workers=args.workers))
    for h in (args.h if args.kind != "theta" else []):
        if args.kind == "chi":
            reports.append(estimators.estimate_chi(params, alpha, h=h, N=args.N, seed=args.seed, workers=args.workers))
        else:
            reports.append(estimators.estimate_gamma(params, alpha, h=h, m=args.m, N=args.N, seed=args.seed,
                                                     workers=args.workers))
    dicts = [r.to_dict() for r in reports]
    if args.format == "csv":
        cols = ("kind", "h", "m", "N", "seed", "estimate", "std_error", "ci_low", "ci_high")
        lines = [",".join(cols)]
        for d in dicts:
            vals = [d["kind"], d["h"], d["m"], d["N"], d["seed"], repr(d["estimate"]), repr(d["std_error"]),
                    repr(d["ci95"][0]), repr(d["ci95"][1])]
            lines.append(",".join("" if v is None else str(v) for v in vals))
        _emit("\n".join(lines) + "\n", args.output)
    else:
        _emit(_json(dicts), args.output)


def cmd_blocks(args):
    series = estimators.read_return_series(args.input)
    if series.skipped:
        print(f"warning: skipped {series.skipped} malformed row(s) in {args.input}", file=sys.stderr)
    if len(series) == 0:
        raise InsufficientDataError(f"no usable numeric rows in {args.input}")
    report = estimators.blocks_estimator(series, args.block_len, args.quantile, method=args.method, seed=args.seed)
    _emit(_json(report.to_dict()), args.output)


def cmd_simulate(args):
    params = _params(args)
    alpha = solve_tail_index(params).alpha
    sample = sample_garch_tail_chain(params, alpha, args.m, args.n, args.conditioning,
                                     rng=np.random.default_rng(args.seed))
    if args.format == "json":
        _emit(_json({"t": sample.times.tolist(), "sigma": sample.sigma_path.tolist(),
                     "zeta": sample.zeta_path.tolist(), "saturated": sample.saturated}), args.output)
    else:
        _emit(sample.to_csv(), args.output)


def cmd_oracle(args):
    params = _params(args)
    config = oracle.PathSimConfig(params=params, length=args.length, burn_in=args.burn_in,
                                  quantile=args.quantile, seed=args.seed)
    emp = oracle.conditional_empirics(config, h_max=args.h, m=args.m)
    alpha = solve_tail_index(params).alpha
    out = emp.to_dict()
    out["tailchain"] = {
        "alpha": alpha,
        "chi": [estimators.estimate_chi(params, alpha, h=h, N=args.N, seed=args.seed, workers=args.workers).estimate
                for h in range(1, args.h + 1)],
        "C": abs_normal_moment(2.0 * alpha),
        "N": args.N,
    }
    _emit(_json(out), args.output)


def cmd_counterexample(args):
    summary = counterexample.accumulation_point_experiment(args.c, args.levels)
    if args.format == "json":
        _emit(_json({"c": summary.c, "b_c": summary.b_c, "x": summary.x.tolist(), "b": summary.b_grid.tolist(),
                     "probability": summary.probabilities[:, -1].tolist(),
                     "gap_mass": summary.gap_mass.tolist()}), args.output)
    else:
        _emit(summary.to_csv(), args.output)


COMMANDS = {
    "alpha": cmd_alpha,
    "table1": cmd_table1,
    "estimate": cmd_estimate,
    "blocks": cmd_blocks,
    "simulate": cmd_simulate,
    "oracle": cmd_oracle,
    "counterexample": cmd_counterexample,
}


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if getattr(args, "config", None):
            args = _apply_config(parser, argv, args)
        RunConfig.from_args(args)
        COMMANDS[args.command](args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (ParameterError, InsufficientDataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
