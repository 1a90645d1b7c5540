"""Command line entry point: plot <kind> --in results.csv --out figure.png"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import KINDS, FigureSpec, SchemaMismatchError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot",
        description="Render a benchmark figure from a result CSV file.",
    )
    parser.add_argument("kind", choices=KINDS, help="figure kind")
    parser.add_argument(
        "--in", dest="input_csv", type=Path, required=True, help="input CSV path"
    )
    parser.add_argument(
        "--out", dest="output", type=Path, required=True, help="output image (png or svg)"
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        path = render(FigureSpec(args.input_csv, args.output, args.kind))
    except SchemaMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
