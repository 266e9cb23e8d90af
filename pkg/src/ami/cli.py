"""Command-line front end.

Subcommands: ``estimate``, ``test-independence``, ``test-asymmetry``,
``simulate``, ``mc``, ``bench``.  Samples are CSV with a header row; results
are JSON.  Exit codes: 0 success, 2 I/O failure, 3 parse failure (the message
names the offending line), 4 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .bench import run_bench
from .estimators import SplitConfig, full_pipeline
from .inference import asymmetry_test, permutation_independence_test
from .io import (
    CsvParseError,
    SampleValidationError,
    read_sample_csv,
    write_json,
    write_null_stats_csv,
    write_sample_csv,
)
from .mc import make_copula_factory, run_mc_asymmetry, run_mc_power
from .synthgen import CopulaSpec, MarginalSpec, PatternSpec, gen_copula_sample, gen_pattern

EXIT_OK = 0
EXIT_IO = 2
EXIT_PARSE = 3
EXIT_VALIDATION = 4


def _load_config(path: str) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        return json.loads(text)
    cfg = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        if not _:
            raise SampleValidationError(f"config line {raw!r} is not key=value")
        value = value.strip()
        try:
            cfg[key.strip()] = json.loads(value)
        except json.JSONDecodeError:
            cfg[key.strip()] = value
    return cfg


def _add_io_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="input CSV (header row required)")
    p.add_argument("--cols", default="0,1", help="two column names or indices, e.g. X,Y")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--output", default=None, help="write JSON here (default: stdout)")


def _add_grid_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", type=int, default=1024, help="marginal grid nodes (power of two)")
    p.add_argument("--grid-2d", type=int, default=256, help="copula grid nodes per axis")
    p.add_argument("--ecf-mode", default="auto", choices=["auto", "exact", "binned"])


def _read(args) -> tuple[np.ndarray, tuple[str, str]]:
    cols = tuple(c.strip() for c in args.cols.split(","))
    if len(cols) != 2:
        raise SampleValidationError(f"--cols must name exactly two columns, got {args.cols!r}")
    return read_sample_csv(args.input, cols, args.delimiter)


def _check_alpha(alpha: float) -> float:
    if not 0.0 < alpha <= 0.5:
        raise SampleValidationError(f"alpha must be in (0, 0.5], got {alpha}")
    return alpha


def _emit(obj: dict, output: str | None) -> None:
    text = write_json(obj, output)
    if output is None:
        print(text)


def cmd_estimate(args) -> int:
    sample, labels = _read(args)
    report = full_pipeline(
        sample,
        SplitConfig(seed=args.split_seed, ratio=args.ratio),
        split_data=not args.no_split,
        alpha=_check_alpha(args.alpha),
        points_1d=args.grid,
        points_2d=args.grid_2d,
        ecf_mode=args.ecf_mode,
        x_label=labels[0],
        y_label=labels[1],
    )
    _emit(report.to_dict(), args.output)
    return EXIT_OK


def cmd_test_independence(args) -> int:
    sample, _ = _read(args)
    res = permutation_independence_test(
        sample,
        n_permutations=args.permutations,
        alpha=_check_alpha(args.alpha),
        seed=args.seed,
        statistic=args.statistic,
        points_1d=args.grid,
        points_2d=args.grid_2d,
    )
    if args.null_stats:
        write_null_stats_csv(args.null_stats, res.null_stats)
    _emit(res.to_dict(), args.output)
    return EXIT_OK


def cmd_test_asymmetry(args) -> int:
    sample, labels = _read(args)
    report = full_pipeline(
        sample,
        SplitConfig(seed=args.split_seed, ratio=args.ratio),
        alpha=_check_alpha(args.alpha),
        points_1d=args.grid,
        points_2d=args.grid_2d,
        ecf_mode=args.ecf_mode,
        x_label=labels[0],
        y_label=labels[1],
    )
    res = asymmetry_test(report, args.alpha)
    _emit(res.to_dict(), args.output)
    return EXIT_OK


def _parse_copula_spec(args, n: int, seed: int) -> CopulaSpec:
    if args.param is None:
        raise SampleValidationError("--param is required with --copula")
    return CopulaSpec(
        family=args.copula,
        param=args.param,
        marginal_x=MarginalSpec.parse(args.marginal_x),
        marginal_y=MarginalSpec.parse(args.marginal_y),
        n=n,
        seed=seed,
    )


def cmd_simulate(args) -> int:
    if (args.pattern is None) == (args.copula is None):
        raise SampleValidationError("simulate needs exactly one of --pattern or --copula")
    if args.pattern is not None:
        spec = PatternSpec(id=args.pattern, a=args.a, n=args.n, seed=args.seed)
        sample = gen_pattern(spec)
        meta = {"design": "pattern", **asdict(spec)}
    else:
        spec = _parse_copula_spec(args, args.n, args.seed)
        sample = gen_copula_sample(spec)
        meta = {"design": "copula", **asdict(spec)}
    out = args.output or "sample.csv"
    write_sample_csv(out, sample, ("X", "Y"))
    write_json(meta, str(out) + ".spec.json")
    print(f"wrote {len(sample)} rows to {out} (provenance in {out}.spec.json)")
    return EXIT_OK


def _write_rows_csv(path: str, rows: list[dict], summary: dict | None = None) -> None:
    if not rows:
        raise SampleValidationError("no rows produced")
    fields = list(rows[0].keys())
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
        if summary is not None:
            fh.write("# summary: " + json.dumps(summary) + "\n")


def cmd_mc(args) -> int:
    alpha = _check_alpha(args.alpha)
    if args.output is None:
        raise SampleValidationError("mc requires --output for the replicate table")
    if args.kind == "power":
        if args.pattern is None:
            raise SampleValidationError("mc --kind power needs --pattern")
        a_values = [float(v) for v in args.a_values.split(",")]
        n_values = [int(v) for v in args.n_values.split(",")]
        rows = run_mc_power(
            args.pattern,
            a_values,
            n_values,
            reps=args.reps,
            n_permutations=args.permutations,
            alpha=alpha,
            master_seed=args.seed,
            n_jobs=args.jobs,
            points_1d=args.grid,
            points_2d=args.grid_2d,
        )
        _write_rows_csv(args.output, rows)
    else:
        if args.copula is None:
            raise SampleValidationError("mc --kind asymmetry needs --copula")
        spec = _parse_copula_spec(args, args.n, args.seed)
        rows, summary = run_mc_asymmetry(
            make_copula_factory(spec, args.seed),
            reps=args.reps,
            alpha=alpha,
            master_seed=args.seed,
            n_jobs=args.jobs,
            points_1d=args.grid,
            points_2d=args.grid_2d,
        )
        _write_rows_csv(args.output, rows, summary)
    print(f"wrote {args.output}")
    return EXIT_OK


def cmd_bench(args) -> int:
    ns = tuple(int(v) for v in args.ns.split(","))
    report = run_bench(ns=ns, seed=args.seed, include_loo=not args.no_loo)
    _emit(report, args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ami",
        description="Asymmetric mutual information: estimation and tests for bivariate data",
    )
    parser.add_argument("--config", default=None, help="JSON or key=value defaults; flags override")
    sub = parser.add_subparsers(dest="command", required=True)
    parser.subcommand_parsers = {}

    p = sub.add_parser("estimate", help="MI, entropies, ER, AMI, delta (JSON report)")
    _add_io_args(p)
    _add_grid_args(p)
    p.add_argument("--no-split", action="store_true", help="in-sample point estimation, no CIs")
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--ratio", type=float, default=0.5)
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_estimate)
    parser.subcommand_parsers["estimate"] = p

    p = sub.add_parser("test-independence", help="permutation test of independence")
    _add_io_args(p)
    _add_grid_args(p)
    p.add_argument("--permutations", type=int, default=1000)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--statistic", default="ami_xy", choices=["ami_xy", "mi"])
    p.add_argument("--null-stats", default=None, help="also dump null statistics CSV here")
    p.set_defaults(func=cmd_test_independence)
    parser.subcommand_parsers["test-independence"] = p

    p = sub.add_parser("test-asymmetry", help="asymptotic test of predictive asymmetry")
    _add_io_args(p)
    _add_grid_args(p)
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--ratio", type=float, default=0.5)
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_test_asymmetry)
    parser.subcommand_parsers["test-asymmetry"] = p

    p = sub.add_parser("simulate", help="draw a synthetic benchmark sample to CSV")
    p.add_argument("--pattern", default=None, help="P1..P8")
    p.add_argument("--a", type=float, default=0.0, help="signal strength for --pattern")
    p.add_argument("--copula", default=None, choices=["gaussian", "clayton", "gumbel"])
    p.add_argument("--param", type=float, default=None)
    p.add_argument("--marginal-x", default="normal:1.0")
    p.add_argument("--marginal-y", default="normal:1.0")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_simulate)
    parser.subcommand_parsers["simulate"] = p

    p = sub.add_parser("mc", help="Monte Carlo experiments (power curves / asymmetry)")
    p.add_argument("--kind", choices=["power", "asymmetry"], required=True)
    p.add_argument("--pattern", default=None)
    p.add_argument("--a-values", default="0,0.25,0.5")
    p.add_argument("--n-values", default="500")
    p.add_argument("--copula", default=None, choices=["gaussian", "clayton", "gumbel"])
    p.add_argument("--param", type=float, default=None)
    p.add_argument("--marginal-x", default="normal:1.0")
    p.add_argument("--marginal-y", default="normal:1.0")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--permutations", type=int, default=199)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--grid", type=int, default=1024)
    p.add_argument("--grid-2d", type=int, default=256)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_mc)
    parser.subcommand_parsers["mc"] = p

    p = sub.add_parser("bench", help="runtime/ISE benchmark vs bandwidth-based KDE")
    p.add_argument("--ns", default="1000,10000")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-loo", action="store_true", help="skip the LOO-tuned KDE variant")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_bench)
    parser.subcommand_parsers["bench"] = p
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    parser = build_parser()
    if known.config:
        try:
            config = _load_config(known.config)
        except OSError as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return EXIT_IO
        for sp in parser.subcommand_parsers.values():  # flags override file defaults
            sp.set_defaults(**config)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CsvParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SampleValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
