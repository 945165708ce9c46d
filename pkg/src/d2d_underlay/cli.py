"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 numerical non-convergence,
4 infeasible optimisation.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from .config import ConfigError, load_config
from .numerics import InversionError, NonConvergenceError
from .sweep import emit_results, find_optimal_beta, run_gamma_sweep, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_INFEASIBLE = 0, 2, 3, 4

COMMANDS = {
    "q-curve": "cellular-mode probability against beta",
    "coverage-curve": "coverage against the SINR threshold at fixed beta",
    "coverage-beta": "coverage against beta at a fixed SINR threshold",
    "ase-sweep": "area spectral efficiency against beta",
    "optimize-beta": "ASE-optimal beta under a cellular coverage constraint",
    "validate": "run the acceptance checks",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 by default; keep that but route through our code
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value configuration file")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--reps", type=int, help="Monte Carlo replications per grid point")
    common.add_argument("--beta-min", type=float, metavar="DBM")
    common.add_argument("--beta-max", type=float, metavar="DBM")
    common.add_argument("--beta-step", type=float, metavar="DB")
    common.add_argument("--beta", type=float, metavar="DBM", help="fixed beta for coverage-curve")
    common.add_argument("--gamma-db", type=float, metavar="X", help="SINR threshold for beta sweeps")
    common.add_argument("--engine", choices=("analytic", "mc", "both"))
    common.add_argument("--window-km", type=float, metavar="R")
    common.add_argument("--workers", type=int, metavar="N")
    common.add_argument("--constraint", type=float, metavar="P", help="coverage constraint for optimize-beta")
    common.add_argument("--out", metavar="PATH", help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--timing", action="store_true", help="fill the wall_ms column (output is then not reproducible)")
    common.add_argument("--quiet", action="store_true", help="do not echo the resolved configuration")

    parser = _Parser(prog="d2d-underlay", description="Coverage and ASE of D2D-underlay uplink networks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_, description=help_)
    return parser


def _overrides(args) -> dict:
    m = {
        "seed": args.seed, "reps": args.reps, "beta_min_dbm": args.beta_min, "beta_max_dbm": args.beta_max,
        "beta_step_db": args.beta_step, "gamma_db": args.gamma_db, "engine": args.engine,
        "window_km": args.window_km, "workers": args.workers, "coverage_constraint": args.constraint,
        "beta_dbm": args.beta,
    }
    return {k: v for k, v in m.items() if v is not None}


def _emit(rows, args, cfg) -> None:
    text = emit_results(rows, args.format, args.out, cfg)
    if args.out is None:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = load_config(args.config, _overrides(args))
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if not args.quiet:
        sys.stderr.write("# resolved configuration\n" + "".join(f"# {l}\n" for l in cfg.echo().splitlines()))

    try:
        if args.command == "validate":
            from .acceptance import run_all

            results = run_all(cfg)
            for r in results:
                print(r.line())
            return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERIC

        if args.command == "coverage-curve":
            rows = run_gamma_sweep(cfg, timing=args.timing)
        elif args.command == "optimize-beta":
            report = find_optimal_beta(cfg)
            if args.out is not None:
                emit_results(report.rows, args.format, args.out, cfg)
            print("\n".join(report.lines()))
            return EXIT_OK if report.feasible else EXIT_INFEASIBLE
        else:
            what = {"q-curve": "q", "coverage-beta": "coverage", "ase-sweep": "all"}[args.command]
            rows = run_sweep(cfg, what=what, timing=args.timing)
        _emit(rows, args, cfg)
        failed = [r for r in rows if r.error is not None]
        for r in failed:
            print(f"row beta={r.beta_dbm:g}: {r.error}", file=sys.stderr)
        return EXIT_NUMERIC if failed else EXIT_OK
    except (NonConvergenceError, InversionError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
