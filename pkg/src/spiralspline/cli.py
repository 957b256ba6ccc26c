"""Command-line front end.

Exit status: 0 when at least one branch succeeds, 1 when every branch
fails, 2 when the data fail validation, 3 when the input cannot be read.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ProblemError, ValidationError
from .io import FORMATS, emit_outputs, load_problem, ranking_table
from .pipeline import RunRequest, run
from .quadrature import QuadratureConfig
from .refiner import SolverConfig

EXIT_OK, EXIT_ALL_FAILED, EXIT_VALIDATION, EXIT_PARSE = 0, 1, 2, 3


def _sigma(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(x) for x in text.replace("(", "").replace(")", "").split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad sign vector {text!r}; use e.g. 1,-1,1") from None
    if any(v not in (-1, 1) for v in vals):
        raise argparse.ArgumentTypeError("sign vector entries must be 1 or -1")
    return vals


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", "-i", required=True, help="CSV (t,x,y rows) or JSON problem file")
    p.add_argument("--format", choices=FORMATS, help="input format (default: from file suffix)")
    sel = p.add_mutually_exclusive_group()
    sel.add_argument("--all", action="store_true", help="every branch (default)")
    sel.add_argument("--sigma", type=_sigma, action="append", help="explicit sign vector such as 1,-1,1 (write --sigma=-1,1 when it starts with -); repeatable")
    sel.add_argument("--top-k", type=int, metavar="K", help="the K branches with lowest estimate energy")
    p.add_argument("--simpson", type=int, default=4, metavar="N", help="starting Simpson subintervals per segment")
    p.add_argument("--tol", type=float, default=1e-10, metavar="X", help="interpolation residual tolerance")
    p.add_argument("--samples", type=int, default=50, metavar="M", help="curve samples per segment")
    p.add_argument("--out", metavar="DIR", help="write per-branch JSON/CSV and summary.csv here")
    p.add_argument("--svg", action="store_true", help="also write an SVG plot per branch")
    p.add_argument("--workers", type=int, help="process pool size (default: SPIRALSPLINE_WORKERS or CPU count)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spiralspline", description="Natural spiral spline interpolation.")
    sub = parser.add_subparsers(dest="command", required=True)
    fit = sub.add_parser("fit", help="estimate or refine branches")
    _common(fit)
    fit.add_argument("--mode", choices=("estimate", "refine"), default="refine")
    opt = sub.add_parser("optimize", help="refine, then minimise energy over the extended family")
    _common(opt)
    rank = sub.add_parser("rank", help="print branches ranked by energy")
    _common(rank)
    rank.add_argument("--mode", choices=("estimate", "refine", "optimize"), default="estimate")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    mode = "optimize" if args.command == "optimize" else args.mode
    try:
        problem = load_problem(args.input, args.format)
    except (OSError, ProblemError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        request = RunRequest(
            problem,
            mode=mode,
            sigmas=tuple(args.sigma) if args.sigma else None,
            top_k=args.top_k,
            quad=QuadratureConfig(args.simpson, max(args.simpson, QuadratureConfig().max_subintervals)),
            solver=SolverConfig(residual_tol=args.tol),
            sample_count=args.samples,
            svg=args.svg,
            workers=args.workers,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        report = run(request)
    except ValidationError as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(ranking_table(report))
    print(f"{len(report.rows)} of {len(report.branches)} branches succeeded in {report.timings['total']:.3f} s")
    if args.out:
        paths = emit_outputs(report, request, args.out)
        print(f"wrote {len(paths)} files to {args.out}")
    return EXIT_OK if report.rows else EXIT_ALL_FAILED


if __name__ == "__main__":
    sys.exit(main())
