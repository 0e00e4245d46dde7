"""Command-line front end: lemma verification and convergence studies.

Reports go to stdout or to ``--output``; the csv and json forms are byte
deterministic for a fixed configuration.  When an output file is written
for a convergence run, a companion log-log figure is rendered next to it
(suppress with ``--no-figure``, or point it elsewhere with ``--figure``).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .analysis import StudyOptions, convergence_study
from .orthogonality import verify_all_lemmas

_PROBLEMS = ("poly1", "trig", "poly2")


@dataclass
class RunConfig:
    """Validated settings of one command-line invocation."""

    command: str
    problem: str | None = None
    levels: tuple[int, ...] = ()
    cg_tol: float = 1e-12
    load_degree: int = 8
    error_degree: int = 8
    load_mode: str = "interpolated"
    fmt: str = "table"
    output: str | None = None
    figure: str | None = None
    no_figure: bool = False
    lift: bool = True
    threads: int | None = None


def _parse_levels(text: str) -> tuple[int, ...]:
    try:
        if ":" in text:
            lo, hi = text.split(":", 1)
            lo, hi = int(lo), int(hi)
            levels = tuple(range(lo, hi + 1))
        else:
            levels = (int(text),)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad level range {text!r}, expected A:B")
    if not levels or any(g < 1 for g in levels):
        raise argparse.ArgumentTypeError(f"level range {text!r} must be ascending and >= 1")
    return levels


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="p2tet",
        description=(
            "Quadratic elements on uniform six-tet cube meshes: exact "
            "orthogonality checks, Poisson solves, cubic lifting, and "
            "convergence tables."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common_out = argparse.ArgumentParser(add_help=False)
    common_out.add_argument(
        "--format", choices=("table", "csv", "json"), default="table", dest="fmt"
    )
    common_out.add_argument("--output", help="write the report here instead of stdout")

    sub.add_parser(
        "verify-lemmas",
        parents=[common_out],
        help="evaluate the 80 exact orthogonality identities",
    )

    study_parent = argparse.ArgumentParser(add_help=False, parents=[common_out])
    study_parent.add_argument(
        "--problem", choices=_PROBLEMS, required=True, help="manufactured solution"
    )
    study_parent.add_argument(
        "--levels", type=_parse_levels, default=(2, 3, 4, 5),
        help="grid levels A:B, level g uses 2^(g-1) cubes per axis (default 2:5)",
    )
    study_parent.add_argument("--cg-tol", type=float, default=1e-12)
    study_parent.add_argument("--load-degree", type=int, default=8)
    study_parent.add_argument("--error-degree", type=int, default=8)
    study_parent.add_argument(
        "--load-mode", choices=("interpolated", "quadrature"), default="interpolated",
        help="forcing term treatment: integrate its quadratic interpolant "
        "(default) or integrate f directly with the load rule",
    )
    study_parent.add_argument("--figure", help="render a convergence figure to this path")
    study_parent.add_argument(
        "--no-figure", action="store_true",
        help="skip the figure that otherwise accompanies --output",
    )
    study_parent.add_argument(
        "--threads", type=int, default=None,
        help="advisory BLAS thread count (env P2TET_THREADS overrides)",
    )

    conv = sub.add_parser(
        "convergence",
        parents=[study_parent],
        help="solve a manufactured problem over a level range and tabulate errors",
    )
    lift_group = conv.add_mutually_exclusive_group()
    lift_group.add_argument("--lift", dest="lift", action="store_true", default=True)
    lift_group.add_argument("--no-lift", dest="lift", action="store_false")

    sub.add_parser(
        "lift-study",
        parents=[study_parent],
        help="convergence of the lifted cubic solution only",
    )
    return parser


def _apply_threads(count: int | None) -> None:
    env = os.environ.get("P2TET_THREADS")
    if env is not None:
        try:
            count = int(env)
        except ValueError:
            raise SystemExit(f"P2TET_THREADS must be an integer, got {env!r}")
    if count is None:
        return
    if count < 1:
        raise SystemExit("thread count must be positive")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(count)


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


def _verify_lemmas(config: RunConfig) -> int:
    report = verify_all_lemmas()
    records = report.to_json_obj()
    if config.fmt == "json":
        text = json.dumps(records, indent=2) + "\n"
    elif config.fmt == "csv":
        lines = ["class,monomial,per_tet,total"]
        for rec in records:
            lines.append(
                f"{rec['class']},{rec['monomial']},{'|'.join(rec['per_tet'])},{rec['total']}"
            )
        text = "\n".join(lines) + "\n"
    else:
        width = max(len(r["monomial"]) for r in records)
        lines = []
        for rec in records:
            lines.append(
                f"{rec['class']:>9}  {rec['monomial']:<{width}}  "
                f"total {rec['total']:>5}  per-tet {' '.join(rec['per_tet'])}"
            )
        ok = "all identities hold exactly" if report.all_zero else "NONZERO TOTALS FOUND"
        lines.append(f"{len(records)} identities checked: {ok}")
        text = "\n".join(lines) + "\n"
    _emit(text, config.output)
    return 0 if report.all_zero else 1


def _study(config: RunConfig) -> int:
    _apply_threads(config.threads)
    options = StudyOptions(
        cg_tol=config.cg_tol,
        load_degree=config.load_degree,
        error_degree=config.error_degree,
        lift=config.lift,
        load=config.load_mode,
    )
    try:
        report = convergence_study(config.problem, config.levels, options)
    except ValueError as exc:
        raise SystemExit(f"error: {exc}")
    if config.command == "lift-study":
        from .analysis import TABLE_BLOCKS

        text = report.format_table(blocks=TABLE_BLOCKS[2:])
        for rec in report.levels:
            for key in list(rec.errors):
                if not key.endswith("_l3uh"):
                    rec.errors[key] = None
                    rec.rates[key] = None
    else:
        text = report.format_table()
    if config.fmt == "json":
        text = report.to_json()
    elif config.fmt == "csv":
        text = report.to_csv()
    _emit(text, config.output)

    figure = config.figure
    if figure is None and config.output and not config.no_figure:
        figure = str(Path(config.output).with_suffix(".png"))
    if figure is not None:
        from .plotting import render_convergence_figure

        render_convergence_figure(report, figure)
    return 0 if report.ok else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "verify-lemmas":
        config = RunConfig(command=args.command, fmt=args.fmt, output=args.output)
        return _verify_lemmas(config)
    if args.command in ("convergence", "lift-study"):
        if args.cg_tol <= 0:
            parser.error("--cg-tol must be positive")
        if args.load_degree < 6:
            parser.error("--load-degree must be at least 6")
        if args.error_degree < 8:
            parser.error("--error-degree must be at least 8")
        config = RunConfig(
            command=args.command,
            problem=args.problem,
            levels=args.levels,
            cg_tol=args.cg_tol,
            load_degree=args.load_degree,
            error_degree=args.error_degree,
            fmt=args.fmt,
            output=args.output,
            figure=args.figure,
            no_figure=args.no_figure,
            lift=args.lift if args.command == "convergence" else True,
            threads=args.threads,
            load_mode=args.load_mode,
        )
        return _study(config)
    parser.error(f"unknown command {args.command!r}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
