"""fbmc-plot: render one fbmc-sim CSV into one figure.

Usage::

    fbmc-plot --kind ccdf --in ccdf.csv --out fig5.png

Exit codes: 0 success, 2 schema/config error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import sys

from .render import FigureJob, FigureKind, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fbmc-plot", description=__doc__.splitlines()[0])
    parser.add_argument("--kind", required=True, choices=[k.value for k in FigureKind])
    parser.add_argument("--in", dest="input_csv", required=True, help="input CSV path")
    parser.add_argument("--out", dest="output_image", required=True, help="output image path")
    parser.add_argument("--title", default="")
    parser.add_argument("--xlabel", default="")
    parser.add_argument("--ylabel", default="")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    job = FigureJob(
        input_csv=args.input_csv,
        figure_kind=FigureKind(args.kind),
        output_image=args.output_image,
        title=args.title,
        xlabel=args.xlabel,
        ylabel=args.ylabel,
    )
    try:
        print(render(job))
    except (SchemaError, FileNotFoundError) as exc:
        print(f"fbmc-plot: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"fbmc-plot: runtime error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
