"""Figure CLI: single-report covers and sweep overlays."""

from __future__ import annotations

import argparse
import sys

from .plotting import plot_cover, plot_sweep


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scenario-cert-plot",
        description="Render an assessment report (or a sweep bundle) as an image.",
    )
    parser.add_argument("--report", help="report JSON (with --samples)")
    parser.add_argument("--samples", help="samples CSV matching the report")
    parser.add_argument("--bundle", help="sweep bundle JSON (overlay mode)")
    parser.add_argument("--row", type=int, default=0, help="safe-set row index")
    parser.add_argument("--out", required=True, help="output image path")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.bundle:
            out = plot_sweep(args.bundle, args.out, row_index=args.row)
        elif args.report and args.samples:
            out = plot_cover(args.report, args.samples, args.out, row_index=args.row)
        else:
            parser.print_usage(sys.stderr)
            print("error: pass --bundle, or --report with --samples", file=sys.stderr)
            return 2
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
