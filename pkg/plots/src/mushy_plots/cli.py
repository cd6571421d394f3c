"""Command line front end: artifact paths in, one vector figure out."""

from __future__ import annotations

import argparse
import sys

from .figures import ArtifactError, plot_comparison, plot_evolution


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="mushy-plots",
        description="Render solver snapshot CSVs into the standard figures.")
    sub = ap.add_subparsers(dest="command", required=True)

    evo = sub.add_parser("evolution",
                         help="4 snapshots of one run, panels in time order")
    evo.add_argument("snapshots", nargs="+", help="exactly 4 snapshot CSVs")
    evo.add_argument("-o", "--out", required=True,
                     help="output image (.svg or .pdf)")
    evo.add_argument("--layout", default="2x2",
                     help="panel grid, e.g. 2x2 or 1x4 (default 2x2)")

    cmp_ = sub.add_parser("comparison",
                          help="two runs at one time on shared axes")
    cmp_.add_argument("snapshot_a")
    cmp_.add_argument("snapshot_b")
    cmp_.add_argument("-o", "--out", required=True,
                      help="output image (.svg or .pdf)")

    args = ap.parse_args(argv)
    try:
        if args.command == "evolution":
            try:
                rows, cols = (int(v) for v in args.layout.lower().split("x"))
            except ValueError:
                raise ArtifactError(f"bad layout {args.layout!r}, want RxC")
            plot_evolution(args.snapshots, args.out, layout=(rows, cols))
        else:
            plot_comparison(args.snapshot_a, args.snapshot_b, args.out)
    except (ArtifactError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
