"""Figure-rendering entry point: reads solver CSVs, writes an image."""

from __future__ import annotations

import argparse
import sys

from .figures import FigureSpec, SchemaMismatch, render

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_SCHEMA = 2
EXIT_USAGE = 64


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="eebeam-plots", description=__doc__)
    parser.add_argument("--kind", required=True, choices=("region", "convergence"))
    parser.add_argument("--in", dest="inputs", required=True, nargs="+", help="input CSV file(s)")
    parser.add_argument("--out", required=True, help="output image path (.png, .svg, .pdf)")
    parser.add_argument("--panel-columns", type=int, default=2)
    parser.add_argument("--dpi", type=int, default=150)
    try:
        args = parser.parse_args(argv)
    except SystemExit:
        return EXIT_USAGE
    try:
        summary = render(
            FigureSpec(
                inputs=tuple(args.inputs),
                kind=args.kind,
                out_path=args.out,
                panel_columns=args.panel_columns,
                dpi=args.dpi,
            )
        )
    except SchemaMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(f"wrote {summary.kind} figure with {summary.n_panels} panel(s) to {summary.path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
