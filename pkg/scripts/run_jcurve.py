#!/usr/bin/env python3
"""Run the 10-trader batch and print the relative-return curve.

Writes runs.csv / jcurve.csv / pvalues.csv into --out (default out/jcurve10).
"""

import argparse
import sys
from pathlib import Path

from infomarket.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--sessions", type=int, default=100)
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--jobs", type=int, default=None)
    ap.add_argument("--out", default="out/jcurve10")
    args = ap.parse_args()
    argv = [
        "batch", "--preset", "jcurve10",
        "--seed", str(args.seed),
        "--sessions", str(args.sessions),
        "--runs", str(args.runs),
        "--out", args.out,
    ]
    if args.jobs is not None:
        argv += ["--jobs", str(args.jobs)]
    rc = cli_main(argv)
    if rc == 0:
        print(Path(args.out, "jcurve.csv").read_text())
    return rc


if __name__ == "__main__":
    sys.exit(main())
