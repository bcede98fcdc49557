"""Script entry: render a figure from a job file or from flags."""

from __future__ import annotations

import argparse
import sys

from .jobs import FigureJob, SchemaError
from .render import KINDS, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="momlab-fig", description="render momlab CSV outputs to images")
    parser.add_argument("--job", help="JSON job file (kind/inputs/output/options)")
    parser.add_argument("--kind", choices=sorted(KINDS))
    parser.add_argument("--csv", action="append", default=[],
                        help="input CSV (repeatable)")
    parser.add_argument("--fit", help="fit JSON from 'momlab collapse'")
    parser.add_argument("--param", default="qx")
    parser.add_argument("--observable", default=None)
    parser.add_argument("--qc", type=float, default=None)
    parser.add_argument("--nu", type=float, default=None)
    parser.add_argument("--out", help="output image path (.png or .svg)")
    args = parser.parse_args(argv)

    if args.job:
        job = FigureJob.from_file(args.job)
    else:
        if not (args.kind and args.csv and args.out):
            parser.error("need --job or all of --kind/--csv/--out")
        options = {"param": args.param}
        for k in ("fit", "observable", "qc", "nu"):
            v = getattr(args, k)
            if v is not None:
                options[k] = v
        job = FigureJob(args.kind, args.csv, args.out, options)
    try:
        out = render(job)
    except (SchemaError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
