"""Command-line figure renderer: penproj-plots <kind> <csv> [--out fig.png]."""

from __future__ import annotations

import argparse
import json
import sys

from .render import FigureSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="penproj-plots", description=__doc__)
    p.add_argument("kind", choices=("sweep_loglog", "field_before_after"))
    p.add_argument("csv", nargs="+")
    p.add_argument("--out", default="fig.png")
    p.add_argument("--title", default="")
    p.add_argument("--manifest", default=None,
                   help="cross-check the annotated slope against this manifest")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(kind=args.kind, csv_paths=tuple(args.csv), out_path=args.out,
                      title=args.title)
    try:
        slope = render(spec)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if slope is not None:
        print(f"wrote {args.out} (slope {slope:.6f})")
        if args.manifest:
            manifest = json.loads(open(args.manifest).read())
            if abs(slope - manifest["slope"]) > 1e-9:
                print(
                    f"error: annotated slope {slope!r} disagrees with manifest "
                    f"{manifest['slope']!r}",
                    file=sys.stderr,
                )
                return 1
    else:
        print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
