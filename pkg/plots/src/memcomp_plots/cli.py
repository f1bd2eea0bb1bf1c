"""Command-line front end: `memcomp-plots render --kind ... --in ... --out ...`"""

from __future__ import annotations

import argparse
import sys

from .render import FIGURE_KINDS, FigureJob, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memcomp-plots",
        description="Render memcomp CSV artifacts into figures",
    )
    sub = parser.add_subparsers(dest="command")
    p = sub.add_parser("render", help="render one figure from CSV input(s)")
    p.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    p.add_argument(
        "--in",
        dest="inputs",
        action="append",
        required=True,
        help="input CSV (repeat for overlay inputs)",
    )
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument("--title", default="")
    p.add_argument(
        "--point",
        dest="points",
        action="append",
        default=[],
        metavar="D1,D2[,LABEL]",
        help="mark a (d1, d2) point on a region map",
    )
    return parser


def _parse_point(text: str):
    parts = text.split(",")
    if len(parts) < 2:
        raise ValueError(f"point {text!r} must be D1,D2[,LABEL]")
    return (float(parts[0]), float(parts[1]), *parts[2:3])


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        job = FigureJob(
            inputs=tuple(args.inputs),
            kind=args.kind,
            output=args.out,
            title=args.title,
            points=tuple(_parse_point(p) for p in args.points),
        )
        out = render(job)
    except (SchemaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


def entrypoint():
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
