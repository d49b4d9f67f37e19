"""One small command per figure kind, taking positional paths."""

import argparse
import sys

from .render import render
from .spec import FigureError, FigureKind, FigureSpec


def _run(kind: FigureKind, doc: str, argv, many: bool = False) -> int:
    parser = argparse.ArgumentParser(description=doc)
    if many:
        parser.add_argument("inputs", nargs="+", help="input CSV paths")
    else:
        parser.add_argument("input", help="input table path")
    parser.add_argument("output", help="output image path")
    args = parser.parse_args(argv)
    inputs = args.inputs if many else [args.input]
    try:
        spec = FigureSpec(inputs=tuple(inputs), kind=kind,
                          output=args.output)
        render(spec)
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.output}")
    return 0


def creep_overlay_main(argv=None) -> int:
    return _run(FigureKind.CREEP_OVERLAY,
                "Overlay velocity and temperature slope from one snapshot.",
                argv)


def rate_fit_main(argv=None) -> int:
    return _run(FigureKind.RATE_FIT,
                "Log-log rate plot with fitted slopes from norm series CSVs.",
                argv, many=True)


def profiles_main(argv=None) -> int:
    return _run(FigureKind.PROFILES,
                "Plot every field column of a profile or snapshot table.",
                argv)
