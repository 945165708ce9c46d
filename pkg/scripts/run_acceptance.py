#!/usr/bin/env python3
"""Run every acceptance check and print one PASS/FAIL line per criterion.

Usage: python scripts/run_acceptance.py [--reps N] [--workers N]
"""

import argparse
import sys

from d2d_underlay.acceptance import COVERAGE_REPS, run_all
from d2d_underlay.config import SweepConfig


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=COVERAGE_REPS, help="MC replications for the coverage checks")
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args()
    results = run_all(SweepConfig(workers=args.workers), reps=args.reps)
    for r in results:
        print(r.line(), flush=True)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} passed" + (f"; failing: {failed}" if failed else ""))
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
