"""plotviz --kind {sweep,scan,gap} --in results.csv --out figure.png"""

from __future__ import annotations

import argparse
import sys

from . import BadHeaderError, EmptyInputError, PlotJob, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plotviz", description=__doc__)
    parser.add_argument("--kind", required=True, choices=["sweep", "scan", "gap"])
    parser.add_argument("--in", dest="input_csv", required=True)
    parser.add_argument("--out", dest="output_image", required=True)
    args = parser.parse_args(argv)
    job = PlotJob(args.input_csv, args.kind, args.output_image)
    try:
        render(job)
    except (BadHeaderError, EmptyInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
