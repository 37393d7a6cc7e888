"""plotkit command line: render one figure from simulator CSV logs.

Usage: plotkit <kind> --in CSV[,CSV...] --out IMG
"""

import argparse
import sys

from .csvio import SchemaError
from .figures import KINDS, FigureSpec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plotkit", description=__doc__)
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="inputs", required=True, metavar="CSV[,CSV...]",
                        help="input CSV path(s), comma separated")
    parser.add_argument("--out", dest="output", required=True, metavar="IMG")
    parser.add_argument("--title")
    args = parser.parse_args(argv)

    try:
        spec = FigureSpec(
            kind=args.kind,
            inputs=[p for p in args.inputs.split(",") if p],
            output=args.output,
            title=args.title,
        )
        result = render(spec)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {result.output} ({result.width_px}x{result.height_px} px, "
          f"{result.series_count} series)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
