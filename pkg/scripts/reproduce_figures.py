#!/usr/bin/env python3
"""Write the tables behind the mode-probability, coverage and ASE curves.

Each table is the CSV the CLI would emit; plotting is left to the reader.
Analytic curves are cheap. Passing --mc adds Monte Carlo columns, which take
far longer.

Usage: python scripts/reproduce_figures.py OUTDIR [--mc] [--reps N]
"""

import argparse
from dataclasses import replace
from pathlib import Path

from d2d_underlay.config import SweepConfig
from d2d_underlay.netmodel import NetworkParams
from d2d_underlay.sweep import emit_results, run_gamma_sweep, run_sweep


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("outdir", type=Path)
    ap.add_argument("--mc", action="store_true", help="add Monte Carlo columns")
    ap.add_argument("--reps", type=int, default=2000)
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)
    engine = "both" if args.mc else "analytic"
    base = SweepConfig(engine=engine, reps=args.reps, workers=args.workers)

    # cellular-mode probability against beta for three BS densities
    for lam in (5.0, 10.0, 15.0):
        cfg = replace(base, params=NetworkParams(lambda_b=lam), beta_min_dbm=-80.0, beta_max_dbm=-20.0,
                      beta_step_db=2.5)
        emit_results(run_sweep(cfg, what="q"), "csv", args.outdir / f"q_curve_lambda{lam:g}.csv", cfg)

    # coverage against the SINR threshold at beta = -50 dBm
    cfg = replace(base, params=NetworkParams(beta=-50.0), gamma_grid_db=tuple(float(g) for g in range(-10, 21, 5)))
    emit_results(run_gamma_sweep(cfg), "csv", args.outdir / "coverage_vs_gamma.csv", cfg)

    # coverage and ASE against beta
    cfg = replace(base, beta_min_dbm=-70.0, beta_max_dbm=-30.0, beta_step_db=2.5)
    emit_results(run_sweep(cfg, what="all"), "csv", args.outdir / "coverage_ase_vs_beta.csv", cfg)
    print(f"tables written to {args.outdir}")


if __name__ == "__main__":
    main()
