"""Acceptance checks shared by the test suite and ``d2d-underlay validate``.

Each check returns a :class:`CheckResult`; nothing here loosens a tolerance
to make a check pass.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.stats import kstest

from . import mcsim
from .analytic import AnalyticModel, mode_boundary
from .config import SweepConfig
from .netmodel import NetworkParams, db_to_lin
from .numerics import cf_invert_below
from .shotnoise import unit_intensity_table
from .sweep import find_optimal_beta, rows_to_csv, run_sweep

MC_SEED = 20240601


@dataclass(frozen=True)
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number}. {self.name}: {self.detail} ({self.seconds:.1f} s)"


def _timed(fn: Callable[[], tuple[bool, str]]) -> tuple[bool, str, float]:
    t0 = time.perf_counter()
    ok, detail = fn()
    return ok, detail, time.perf_counter() - t0


# ----------------------------------------------------------------- criterion 1

Q_BETAS = tuple(range(-70, -25, 5))
Q_DENSITIES = (5.0, 10.0, 15.0)


def mode_probability_agreement(params: NetworkParams | None = None, trials: int = 10_000) -> CheckResult:
    base = params or NetworkParams()

    def run():
        worst = 0.0
        where = None
        for lam in Q_DENSITIES:
            p = base.with_(lambda_b=lam)
            q_mc, _ = mcsim.mode_fraction(p, Q_BETAS, n=trials, seed=MC_SEED)
            for b, qm in zip(Q_BETAS, q_mc):
                qa = mode_boundary(p.with_(beta=float(b))).q
                if abs(qa - qm) > worst:
                    worst, where = abs(qa - qm), (lam, b, qa, qm)
        return worst, where

    t0 = time.perf_counter()
    worst, (lam, b, qa, qm) = run()
    secs = time.perf_counter() - t0
    ok = worst <= 0.015 and secs < 120
    return CheckResult(1, "mode probability vs MC", ok,
                       f"max |dq| = {worst:.4f} (lambda_b={lam:g}, beta={b}: {qa:.4f} vs {qm:.4f}), limit 0.015", secs)


# ----------------------------------------------------------------- criterion 2


def mode_probability_anchor(params: NetworkParams | None = None) -> CheckResult:
    p = (params or NetworkParams()).with_(lambda_b=5.0, beta=-55.0)
    t0 = time.perf_counter()
    q = mode_boundary(p).q
    return CheckResult(2, "q(-55 dBm, 5/km^2) in [0.45, 0.60]", 0.45 <= q <= 0.60, f"q = {q:.4f}",
                       time.perf_counter() - t0)


# ------------------------------------------------------------ criteria 3 and 4

COVERAGE_BETA = -50.0
COVERAGE_GAMMAS_DB = (-10.0, 0.0, 10.0)
COVERAGE_REPS = 20_000


@lru_cache(maxsize=4)
def _coverage_mc(params: NetworkParams, reps: int, workers: int | None) -> tuple[mcsim.McRun, float]:
    t0 = time.perf_counter()
    run = mcsim.run_replications(params, reps, MC_SEED, 5.0, workers=workers)
    return run, time.perf_counter() - t0


@lru_cache(maxsize=4)
def _coverage_model(params: NetworkParams) -> AnalyticModel:
    return AnalyticModel(params)


def coverage_agreement(params: NetworkParams | None = None, reps: int = COVERAGE_REPS,
                       workers: int | None = None) -> CheckResult:
    p = (params or NetworkParams()).with_(beta=COVERAGE_BETA)
    t0 = time.perf_counter()
    run, _ = _coverage_mc(p, reps, workers)
    model = _coverage_model(p)
    g = db_to_lin(np.array(COVERAGE_GAMMAS_DB))
    ana = {"cellular": model.coverage_cellular(g), "d2d": model.coverage_d2d(g)}
    secs = time.perf_counter() - t0
    parts, worst = [], 0.0
    for mode in ("cellular", "d2d"):
        batch = run.batch(mode)
        for gdb, gl, a in zip(COVERAGE_GAMMAS_DB, g, ana[mode]):
            m = mcsim.estimate_coverage(batch, float(gl)).value
            worst = max(worst, abs(a - m))
            parts.append(f"{mode}@{gdb:g}dB {a:.3f}/{m:.3f}")
    ok = worst <= 0.03 and secs < 1800
    return CheckResult(3, "coverage vs MC at beta=-50 dBm", ok,
                       f"max |d| = {worst:.4f}, limit 0.03; analytic/MC: " + ", ".join(parts), secs)


def d2d_flatness(params: NetworkParams | None = None, reps: int = COVERAGE_REPS,
                 workers: int | None = None) -> CheckResult:
    p = (params or NetworkParams()).with_(beta=COVERAGE_BETA)
    t0 = time.perf_counter()
    model = _coverage_model(p)
    a0, a15 = model.coverage_d2d(db_to_lin(np.array([0.0, 15.0])))
    run, _ = _coverage_mc(p, reps, workers)
    batch = run.batch("d2d")
    m0 = mcsim.estimate_coverage(batch, 1.0).value
    m15 = mcsim.estimate_coverage(batch, float(db_to_lin(15.0))).value
    ok = abs(a0 - a15) <= 0.2 and abs(m0 - m15) <= 0.2
    return CheckResult(4, "D2D coverage 15 dB vs 0 dB within 0.2", ok,
                       f"analytic {a0:.3f} -> {a15:.3f}, MC {m0:.3f} -> {m15:.3f}", time.perf_counter() - t0)


# ----------------------------------------------------------------- criterion 5


def optimal_threshold(config: SweepConfig | None = None) -> CheckResult:
    cfg = replace(config or SweepConfig(), engine="analytic", coverage_constraint=0.9,
                  beta_min_dbm=-70.0, beta_max_dbm=-30.0, beta_step_db=5.0)
    t0 = time.perf_counter()
    rep = find_optimal_beta(cfg)
    secs = time.perf_counter() - t0
    if not rep.feasible:
        return CheckResult(5, "optimal beta in [-60, -50] with cov_cell >= 0.9", False,
                           f"infeasible; best coverage {rep.closest_row.cov_cell_analytic:.4f}", secs)
    ok = -60.0 <= rep.beta_star <= -50.0 and rep.cov_cell_star >= 0.9
    return CheckResult(5, "optimal beta in [-60, -50] with cov_cell >= 0.9", ok,
                       f"beta* = {rep.beta_star:.2f} dBm, ASE* = {rep.ase_star:.4g}, cov_cell = {rep.cov_cell_star:.4f}",
                       secs)


# ----------------------------------------------------------------- criterion 6


def cf_oracles() -> CheckResult:
    def uniform_cf(w):
        w = np.asarray(w, dtype=float)
        safe = np.where(w == 0, 1.0, w)
        return np.where(w == 0, 1.0 + 0j, (np.exp(1j * safe) - 1.0) / (1j * safe))

    cases = [
        ("exponential x=1", lambda w: 1.0 / (1.0 - 1j * np.asarray(w)), 1.0, 1.0 - math.exp(-1.0)),
        ("uniform x=0.5", uniform_cf, 0.5, 0.5),
        ("uniform x=0.25", uniform_cf, 0.25, 0.25),
        ("point mass 0.7, x=1", lambda w: np.exp(0.7j * np.asarray(w)), 1.0, 1.0),
        ("point mass 0.7, x=0.5", lambda w: np.exp(0.7j * np.asarray(w)), 0.5, 0.0),
    ]
    t0 = time.perf_counter()
    errs = [abs(cf_invert_below(phi, x) - exact) for _, phi, x, exact in cases]
    secs = time.perf_counter() - t0
    worst = max(errs)
    ok = worst <= 1e-4 and secs < 1.0
    return CheckResult(6, "CF inversion oracles", ok, f"max error {worst:.2e} over {len(cases)} cases, limit 1e-4", secs)


# ----------------------------------------------------------------- criterion 7


def equivalence_ks(params: NetworkParams | None = None, n: int = 10_000) -> CheckResult:
    p = params or NetworkParams()
    t0 = time.perf_counter()
    samples = mcsim.sample_min_equivalent_distance(p, n=n, seed=MC_SEED)
    table = unit_intensity_table(p.bs_profile, p.sigma_shadow_bs).scaled(p.lambda_b)
    stat = kstest(samples, lambda t: 1.0 - table.void_probability(np.asarray(t))).statistic
    secs = time.perf_counter() - t0
    ok = stat <= 0.02 and secs < 60
    return CheckResult(7, "minimum equivalent distance KS", ok, f"KS = {stat:.4f}, limit 0.02, n = {n}", secs)


# ----------------------------------------------------------------- criterion 8


def identities(config: SweepConfig | None = None) -> CheckResult:
    cfg = config or SweepConfig()
    t0 = time.perf_counter()
    problems = []
    p = cfg.params
    qs = [mode_boundary(p.with_(beta=float(b))).q for b in np.arange(-80, -19, 2.5)]
    if not all(a > b for a, b in zip(qs, qs[1:])):
        problems.append("q not strictly decreasing")
    model = AnalyticModel(p.with_(beta=-50.0))
    gam = db_to_lin(np.arange(-10.0, 21.0, 5.0))
    for name, cov in (("cellular", model.coverage_cellular(gam)), ("d2d", model.coverage_d2d(gam))):
        if np.any(np.diff(cov) > 1e-9):
            problems.append(f"{name} coverage increases in gamma")
        if np.any((cov < 0) | (cov > 1)):
            problems.append(f"{name} coverage outside [0, 1]")
    total, cell, d2d = model.ase_total(1.0)
    if total != cell + d2d:
        problems.append("ase_total != ase_cell + ase_d2d")
    from .netmodel import LOS
    r = float(model.cu_law[LOS].r[5])
    w = np.array([0.0, 0.3, 3.0, 30.0])
    phi = model.cf_inv_sinr_cellular(LOS, w, r)
    phim = model.cf_inv_sinr_cellular(LOS, -w, r)
    if abs(phi[0] - 1) > 1e-12 or np.any(np.abs(phi) > 1 + 1e-6) or np.any(np.abs(phim - np.conj(phi)) > 1e-12):
        problems.append("cellular CF normalisation or symmetry")
    # thread-count determinism of the emitted CSV
    small = replace(cfg, engine="both", reps=200, beta_min_dbm=-60.0, beta_max_dbm=-50.0, beta_step_db=10.0)
    csv1 = rows_to_csv(run_sweep(replace(small, workers=1), what="coverage"))
    csv2 = rows_to_csv(run_sweep(replace(small, workers=2), what="coverage"))
    if csv1 != csv2:
        problems.append("CSV differs between worker counts")
    secs = time.perf_counter() - t0
    return CheckResult(8, "identities, monotonicity and determinism", not problems,
                       "all hold" if not problems else "; ".join(problems), secs)


def run_all(config: SweepConfig | None = None, reps: int = COVERAGE_REPS) -> list[CheckResult]:
    cfg = config or SweepConfig()
    p = cfg.params
    return [
        mode_probability_agreement(p),
        mode_probability_anchor(p),
        coverage_agreement(p, reps, cfg.workers),
        d2d_flatness(p, reps, cfg.workers),
        optimal_threshold(cfg),
        cf_oracles(),
        equivalence_ks(p),
        identities(cfg),
    ]
