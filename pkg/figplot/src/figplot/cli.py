"""Command-line entry point: `figplot <figure-id> --in <dir> --out <file.png>`."""

from __future__ import annotations

import argparse
import sys

from figplot.render import FIGURE_IDS, FigplotError, PlotJob, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figplot",
        description="Render ray-lensing figures from hopflens CLI exports")
    parser.add_argument("figure_id", metavar="figure-id",
                        help=f"one of {', '.join(FIGURE_IDS)}")
    parser.add_argument("--in", dest="input_dir", required=True,
                        help="directory holding the required export files")
    parser.add_argument("--out", dest="output_path", required=True,
                        help="output image path (.png)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        job = PlotJob(figure_id=args.figure_id, input_dir=args.input_dir,
                      output_path=args.output_path)
        info = render(job)
    except FigplotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    summary = " ".join(f"{k}={v}" for k, v in info.items())
    print(f"wrote {args.output_path} ({summary})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
