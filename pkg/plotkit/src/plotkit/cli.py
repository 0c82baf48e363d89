"""plotkit command line: render figures from winding-wavemap run directories."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .figures import FIGURE_KINDS, FigureSpec, MissingColumnError, render


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="plotkit",
                                description="figure generation for winding-wavemap outputs")
    sub = p.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("render", help="render one figure kind from a run directory")
    sp.add_argument("--run", required=True, help="run directory")
    sp.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    sp.add_argument("--out", required=True, help="output image path (.png/.svg/.pdf)")
    sp.add_argument("--log-y", action="store_true")
    sp.add_argument("--snapshot-time", type=float, default=None,
                    help="profile kind: snapshot time to plot (default: latest)")
    sp.add_argument("--dpi", type=int, default=120)
    return p


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    spec = FigureSpec(run_dir=Path(args.run), kind=args.kind, out_path=Path(args.out),
                      log_y=args.log_y, snapshot_time=args.snapshot_time, dpi=args.dpi)
    try:
        result = render(spec)
    except MissingColumnError as exc:
        print(json.dumps({"error": "missing-column", "column": exc.column,
                          "message": str(exc)}), file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(json.dumps({"error": "missing-file", "message": str(exc)}), file=sys.stderr)
        return 1
    print(json.dumps({"out": str(result.out_path), "annotations": result.annotations},
                     indent=2, sort_keys=True))
    return 0


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
