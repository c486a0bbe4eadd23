"""Command-line entry point: ``complexity-lab <command> [options]``.

Exit status is 0 on success, 2 when any output cell holds an error marker
(or ``validate`` finds a violation), and 1 on a configuration error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .dynamics import read_weights
from .errors import ComplexityLabError
from .experiments import (
    ExperimentConfig,
    columns_for,
    count_errors,
    default_beta_grid,
    hopfield_capacity,
    hopfield_learn,
    measure,
    parse_beta_grid,
    render_table,
    summarize,
    sweep_beta,
    validate_file,
)

EXIT_OK, EXIT_CONFIG, EXIT_ROW_ERROR = 0, 1, 2


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _weights_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo,hi but got {text!r}") from None
    return lo, hi


def _beta_grid(text: str) -> tuple[float, ...]:
    try:
        return parse_beta_grid(text)
    except ComplexityLabError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_common(p: argparse.ArgumentParser, nodes_default: int | None):
    if nodes_default is not None:
        p.add_argument("--nodes", type=int, default=nodes_default, help="number of binary nodes N")
    p.add_argument("--out", metavar="PATH", help="output CSV (default: stdout)")


def _add_trials(p: argparse.ArgumentParser):
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0, help="64-bit seed; trial k uses substream k")
    p.add_argument("--workers", type=int, default=None, help="worker processes (capped by COMPLEXITY_LAB_THREADS)")
    p.add_argument(
        "--summary",
        nargs="?",
        const="",
        metavar="PATH",
        help="also write trial mean and standard error per x (default path: OUT with .summary.csv)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="complexity-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sweep-beta", help="random Boltzmann machines across a beta grid")
    _add_common(p, 5)
    _add_trials(p)
    p.add_argument("--beta-grid", type=_beta_grid, default=default_beta_grid(), help='"start:stop:step" or "b1,b2,..."')
    p.add_argument("--weights-range", type=_weights_range, default=(-1.0, 1.0), metavar="LO,HI")
    p.add_argument("--tol-projection", type=float, default=1e-9)
    p.add_argument("--tol-stationary", type=float, default=1e-13)

    p = sub.add_parser("measure", help="all measures for one weight file at one beta")
    _add_common(p, None)
    p.add_argument("--weights", required=True, metavar="CSV", help="N x N weights, w[j,i] at row j column i")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--tol-projection", type=float, default=1e-9)
    p.add_argument("--tol-stationary", type=float, default=1e-13)

    p = sub.add_parser("hopfield-learn", help="information flow while storing random patterns")
    _add_common(p, 9)
    _add_trials(p)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--patterns-max", type=int, default=30)
    p.add_argument("--zero-diagonal", action="store_true", help="set w_ii = 0")
    p.add_argument("--tol-stationary", type=float, default=1e-13)

    p = sub.add_parser("hopfield-capacity", help="complexity capacity of the deterministic network")
    _add_common(p, 9)
    _add_trials(p)
    p.add_argument("--patterns-max", type=int, default=30)
    p.add_argument("--zero-diagonal", action="store_true", help="set w_ii = 0")
    p.add_argument("--tol-capacity", type=float, default=1e-6, help="Frank-Wolfe duality-gap tolerance")

    p = sub.add_parser("validate", help="check emitted values against their bounds")
    p.add_argument("paths", nargs="+", metavar="CSV")
    return parser


def _config(args) -> ExperimentConfig:
    kw: dict = {"command": args.command, "out": args.out}
    for name in ("trials", "seed", "patterns_max", "zero_diagonal", "tol_projection", "tol_stationary", "tol_capacity"):
        if hasattr(args, name):
            kw[name] = getattr(args, name)
    if hasattr(args, "nodes"):
        kw["n_nodes"] = args.nodes
    if hasattr(args, "beta_grid"):
        kw["beta_grid"] = args.beta_grid
    if hasattr(args, "beta"):
        kw["beta_grid"] = (args.beta,)
    if hasattr(args, "weights_range"):
        kw["weight_low"], kw["weight_high"] = args.weights_range
    return ExperimentConfig(**kw)


def _emit(text: str, path: str | None):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _summary_path(args) -> str | None:
    if getattr(args, "summary", None) is None:
        return None
    if args.summary:
        return args.summary
    if not args.out:
        raise ConfigError("--summary without a PATH needs --out")
    out = Path(args.out)
    return str(out.with_name(out.stem + ".summary.csv"))


def _validate(paths: Sequence[str]) -> int:
    status = EXIT_OK
    for path in paths:
        problems = validate_file(path)
        for msg in problems:
            print(f"{path}: {msg}")
        if problems:
            status = EXIT_ROW_ERROR
        else:
            print(f"{path}: ok")
    return status


def run(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        return _validate(args.paths)

    summary_path = _summary_path(args)
    if args.command == "measure":
        weights = read_weights(args.weights)
        args.nodes = weights.shape[0]
        cfg = _config(args)
        header = cfg.header_items() + [("weights", args.weights)]
        rows = measure(cfg, weights)
    else:
        cfg = _config(args)
        header = cfg.header_items()
        runner = {"sweep-beta": sweep_beta, "hopfield-learn": hopfield_learn, "hopfield-capacity": hopfield_capacity}
        rows = runner[cfg.command](cfg, workers=args.workers)

    columns = columns_for(cfg.command)
    _emit(render_table(header, columns, rows), cfg.out)
    if summary_path:
        s_cols, s_rows = summarize(columns, rows)
        Path(summary_path).write_text(render_table(header + [("table", "summary")], s_cols, s_rows))
    errors = count_errors(rows)
    if errors:
        print(f"complexity-lab: {errors} cell(s) failed; see error: markers", file=sys.stderr)
        return EXIT_ROW_ERROR
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    try:
        return run(argv)
    except (ConfigError, ComplexityLabError, OSError) as exc:
        print(f"complexity-lab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
