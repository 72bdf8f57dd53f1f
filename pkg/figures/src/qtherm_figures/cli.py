"""figures render --fig N --in <dir> --out <dir>

Renders one figure (or 'all') from a directory of runner CSV files.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .io import MissingColumnError
from .render import render
from .specs import FIGURE_IDS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="figures",
                                     description="Render qtherm CSV output")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure or all of them")
    p.add_argument("--fig", required=True,
                   help=f"figure number {FIGURE_IDS[0]}-{FIGURE_IDS[-1]}, or 'all'")
    p.add_argument("--in", dest="input_dir", type=Path, required=True,
                   help="directory with runner CSV files")
    p.add_argument("--out", dest="output_dir", type=Path, required=True,
                   help="directory for the images")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(sys.argv[1:] if argv is None else argv)
    if args.fig == "all":
        fig_ids = list(FIGURE_IDS)
    else:
        try:
            fig_ids = [int(args.fig)]
        except ValueError:
            print(f"figures: --fig must be an integer or 'all', got '{args.fig}'",
                  file=sys.stderr)
            return 2
    if not args.input_dir.is_dir():
        print(f"figures: input directory {args.input_dir} does not exist",
              file=sys.stderr)
        return 2
    try:
        for fig_id in fig_ids:
            png, pdf = render(fig_id, args.input_dir, args.output_dir)
            print(png)
            print(pdf)
    except (MissingColumnError, FileNotFoundError, ValueError) as exc:
        print(f"figures: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
