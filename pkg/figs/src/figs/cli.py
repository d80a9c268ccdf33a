"""render <figure> --in <dir> --out <file>"""

from __future__ import annotations

import argparse
from pathlib import Path

from .render import RENDERERS, render
from .spec import FigureSpec, SchemaError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render",
        description="Render scenario CSV/JSON outputs into figure images",
    )
    parser.add_argument("figure", choices=sorted(RENDERERS))
    parser.add_argument("--in", dest="input_dir", type=Path, required=True,
                        help="scenario output directory")
    parser.add_argument("--out", type=Path, required=True, help="image file to write")
    parser.add_argument("--dpi", type=int, default=160)
    parser.add_argument("--counts", default="counts_a.csv",
                        help="histogram file for figS1")
    parser.add_argument("--resonance", default="I", help="track for figS2")
    args = parser.parse_args(argv)
    spec = FigureSpec(args.figure, args.input_dir, args.out,
                      {"dpi": args.dpi, "counts": args.counts,
                       "resonance": args.resonance})
    try:
        out = render(spec)
    except SchemaError as exc:
        parser.exit(2, f"error: {exc}\n")
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
