"""Command line: render figures from spec files.

    spintexfig render --spec anisotropy.yaml --out figures/

Exit codes mirror the simulation command line: 0 success, 2 for
usage/spec errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .panels import render_panel
from .spec import SpecError, load_spec

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spintexfig",
        description="render publication-style figures from simulation "
        "output corpora",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    render = sub.add_parser(
        "render", help="render one figure specification"
    )
    render.add_argument(
        "--spec", required=True, type=Path, help="figure spec (YAML)"
    )
    render.add_argument(
        "--out", required=True, type=Path, help="output directory"
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = load_spec(args.spec)
        image, sidecar = render_panel(spec, args.out)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {image}")
    print(f"wrote {sidecar}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
