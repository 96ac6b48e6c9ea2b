"""Command-line interface: figures ratio-grid / figures cash."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from vcash_figures.loader import FigureInputError
from vcash_figures.render import CASH_SERIES, RATIO_GRID, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render figures from simulator CSV output",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("ratio-grid", "bogus-ratio grid over a completed sweep directory"),
        ("cash", "per-mode vehicle cash series from one run directory"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--in", dest="input_dir", required=True)
        p.add_argument("--out", dest="output", required=True)
        p.add_argument("--format", dest="image_format", default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    kind = RATIO_GRID if args.command == "ratio-grid" else CASH_SERIES
    spec = FigureSpec(
        input_dir=Path(args.input_dir),
        figure=kind,
        output=Path(args.output),
        image_format=args.image_format,
    )
    try:
        render(spec)
    except FigureInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {spec.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
