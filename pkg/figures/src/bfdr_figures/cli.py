"""figures <kind> <in.csv> <out> - render one experiment CSV to an image."""
from __future__ import annotations

import argparse
import sys

from .render import FigureSpec, render
from .schemas import KINDS, EmptyInputError, SchemaMismatchError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render boundary-fdr experiment CSVs as figures",
    )
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("input_csv")
    parser.add_argument("output", help="image path; extension picks the format")
    parser.add_argument("--title", default=None)
    parser.add_argument("--dpi", type=int, default=150)
    parser.add_argument("--no-reference-lines", action="store_true")
    parser.add_argument(
        "--cutoffs", default=None,
        help="comma-separated vertical cutoff positions (calibration only)",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    style = {"dpi": args.dpi, "reference_lines": not args.no_reference_lines}
    if args.title:
        style["title"] = args.title
    if args.cutoffs:
        style["cutoffs"] = [float(tok) for tok in args.cutoffs.split(",")]
    spec = FigureSpec(
        kind=args.kind, input_csv=args.input_csv, output_path=args.output, style=style
    )
    try:
        out = render(spec)
    except (SchemaMismatchError, EmptyInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
