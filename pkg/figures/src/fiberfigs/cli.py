"""Command line entry point: --manifest <path> --figure <id> [--out <path>]."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import FIGURE_IDS, FigureJob, SchemaMismatch, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="chiralfiber-figures",
        description="Render figures from simulation CSV/JSON artifacts",
    )
    parser.add_argument("--manifest", required=True, help="run manifest.json")
    parser.add_argument("--figure", required=True, choices=FIGURE_IDS)
    parser.add_argument(
        "--out",
        default=None,
        help="output image basename (default: <run dir>/<figure id>)",
    )
    args = parser.parse_args(argv)
    manifest = Path(args.manifest)
    if not manifest.exists():
        print(f"manifest not found: {manifest}", file=sys.stderr)
        return 2
    out = Path(args.out) if args.out else manifest.parent / args.figure
    job = FigureJob(manifest=manifest, figure=args.figure, output=out)
    try:
        written = render(job)
    except SchemaMismatch as exc:
        print(f"schema mismatch: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
