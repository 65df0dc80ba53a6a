"""Figure CLI: ``qtyp-plots plot --kind KIND --in a.csv --in b.csv --out fig.svg``."""

import argparse
import sys

from .render import KINDS, InputError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qtyp-plots",
        description="Render SVG figures from qtypicality CSV artifacts",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("plot", help="render one figure")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--in", dest="inputs", action="append", default=[],
                   metavar="CSV", help="input CSV (repeatable)")
    p.add_argument("--out", required=True, help="output SVG path")
    p.add_argument("--theory-line", type=float, default=None,
                   help="dashed horizontal prediction line")
    p.add_argument("--shift", type=float, default=0.1,
                   help="vertical shift per trace (squeezing-stack)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = render(args.kind, args.inputs, args.out,
                     theory_line=args.theory_line, shift=args.shift)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
