"""Command line: python -m plotkit KIND OUTPUT INPUT..."""

from __future__ import annotations

import argparse
import sys

from plotkit.figures import KINDS, FigureSpec, render
from plotkit.io import SchemaError


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="plotkit", description=__doc__)
    ap.add_argument("kind", choices=KINDS)
    ap.add_argument("output", help="image path; .png, .svg or .pdf")
    ap.add_argument("inputs", nargs="+", help="run CSVs or a gap_report.json")
    ap.add_argument("--title", default="")
    ap.add_argument("--classes", type=lambda s: [int(x) for x in s.split(",")], default=None)
    ap.add_argument("--beta", type=float, default=None)
    ap.add_argument("--stuck-ceiling", type=float, default=None)
    args = ap.parse_args(argv)
    spec = FigureSpec(inputs=args.inputs, kind=args.kind, output=args.output, title=args.title,
                      classes=args.classes, beta=args.beta, stuck_ceiling=args.stuck_ceiling)
    try:
        out = render(spec)
    except (SchemaError, ValueError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
