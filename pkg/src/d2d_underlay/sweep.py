"""Sweep orchestration across both engines, optimal-threshold search and result emission."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import mcsim
from .analytic import AnalyticModel
from .config import SweepConfig
from .netmodel import db_to_lin
from .numerics import InversionError, NonConvergenceError

CSV_HEADER = (
    "beta_dbm,q_analytic,q_mc,q_mc_ci95,cov_cell_analytic,cov_cell_mc,cov_cell_ci95,"
    "cov_d2d_analytic,cov_d2d_mc,cov_d2d_ci95,ase_cell,ase_d2d,ase_total,skips,wall_ms"
)
NAN = math.nan


@dataclass(frozen=True)
class SweepRow:
    beta_dbm: float
    q_analytic: float = NAN
    q_mc: float = NAN
    q_mc_ci95: float = NAN  # half-width
    cov_cell_analytic: float = NAN
    cov_cell_mc: float = NAN
    cov_cell_ci95: float = NAN
    cov_d2d_analytic: float = NAN
    cov_d2d_mc: float = NAN
    cov_d2d_ci95: float = NAN
    ase_cell: float = NAN
    ase_d2d: float = NAN
    ase_total: float = NAN
    skips: int = 0
    wall_ms: float = NAN
    gamma_db: float | None = field(default=None, compare=False)
    error: str | None = field(default=None, compare=False)

    def check(self) -> None:
        """Per-row invariants: probabilities in [0, 1] and the ASE sum identity."""
        for name in ("q_analytic", "q_mc", "cov_cell_analytic", "cov_cell_mc", "cov_d2d_analytic", "cov_d2d_mc"):
            v = getattr(self, name)
            if not math.isnan(v) and not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1] at beta={self.beta_dbm}")
        if not math.isnan(self.ase_total) and self.ase_total != self.ase_cell + self.ase_d2d:
            raise ValueError(f"ase_total != ase_cell + ase_d2d at beta={self.beta_dbm}")


COLUMNS = tuple(CSV_HEADER.split(","))


@dataclass(frozen=True)
class OptimizationReport:
    beta_star: float | None
    ase_star: float | None
    cov_cell_star: float | None
    beta_unconstrained: float
    ase_unconstrained: float
    constraint: float
    feasible: bool
    closest_row: SweepRow | None
    rows: tuple[SweepRow, ...]

    def lines(self) -> list[str]:
        out = [f"constraint = {self.constraint:.6g}", f"feasible = {str(self.feasible).lower()}"]
        if self.feasible:
            out += [f"beta_star_dbm = {self.beta_star:.6g}", f"ase_star = {self.ase_star:.6g}",
                    f"cov_cell_star = {self.cov_cell_star:.6g}"]
        elif self.closest_row is not None:
            out += [f"closest_beta_dbm = {self.closest_row.beta_dbm:.6g}",
                    f"closest_cov_cell = {self.closest_row.cov_cell_analytic:.6g}"]
        out += [f"beta_unconstrained_dbm = {self.beta_unconstrained:.6g}",
                f"ase_unconstrained = {self.ase_unconstrained:.6g}"]
        return out


# --------------------------------------------------------------- row evaluation


@dataclass(frozen=True)
class RowTask:
    """What to compute at one grid point."""

    config: SweepConfig
    beta_dbm: float
    gamma_db: float
    q: bool = True
    coverage: bool = True
    ase: bool = True
    timing: bool = False


def _analytic_part(task: RowTask) -> dict:
    p = task.config.params.with_(beta=float(task.beta_dbm))
    model = AnalyticModel(p)
    out = {"q_analytic": model.boundary.q}
    g = float(db_to_lin(task.gamma_db))
    if task.coverage:
        out["cov_cell_analytic"] = float(model.coverage_cellular(g))
        out["cov_d2d_analytic"] = float(model.coverage_d2d(g))
    if task.ase:
        total, cell, d2d = model.ase_total(float(db_to_lin(p.gamma_0)))
        out.update(ase_cell=cell, ase_d2d=d2d, ase_total=total)
    return out


def _mc_part(task: RowTask, workers: int) -> dict:
    cfg = task.config
    p = cfg.params.with_(beta=float(task.beta_dbm))
    out: dict = {}
    if task.q:
        q, _ = mcsim.mode_fraction(p, [task.beta_dbm], n=cfg.reps, seed=cfg.seed, radius=cfg.window_km)
        k = int(round(q[0] * cfg.reps))
        lo, hi = mcsim.wilson_interval(k, cfg.reps)
        out.update(q_mc=float(q[0]), q_mc_ci95=0.5 * (hi - lo))
    if task.coverage or task.ase:
        run = mcsim.run_replications(p, cfg.reps, cfg.seed, cfg.window_km, workers=workers)
        g = float(db_to_lin(task.gamma_db))
        skips = 0
        for mode, col in (("cellular", "cov_cell"), ("d2d", "cov_d2d")):
            batch = run.batch(mode)
            skips += batch.skips
            if len(batch.values):
                est = mcsim.estimate_coverage(batch, g)
                out[f"{col}_mc"] = est.value
                out[f"{col}_ci95"] = est.half_width
        out["skips"] = skips
        if task.ase and cfg.engine == "mc":
            g0 = float(db_to_lin(p.gamma_0))
            cell = mcsim.estimate_ase(run.batch("cellular"), p.lambda_b, g0, seed=cfg.seed).value
            dens = 0.5 * p.rho * (1 - run.cellular_fraction()) * p.lambda_u
            d2d_b = run.batch("d2d")
            d2d = mcsim.estimate_ase(d2d_b, dens, g0, seed=cfg.seed).value if len(d2d_b.values) else 0.0
            out.update(ase_cell=cell, ase_d2d=d2d, ase_total=cell + d2d)
    return out


def evaluate_row(task: RowTask, mc_workers: int = 1) -> SweepRow:
    t0 = time.perf_counter()
    vals: dict = {}
    err = None
    try:
        if task.config.engine in ("analytic", "both"):
            vals.update(_analytic_part(task))
        if task.config.engine in ("mc", "both"):
            vals.update(_mc_part(task, mc_workers))
    except (NonConvergenceError, InversionError, FloatingPointError) as e:
        err = f"{type(e).__name__}: {e}"
    wall = (time.perf_counter() - t0) * 1e3 if task.timing else NAN
    return SweepRow(beta_dbm=float(task.beta_dbm), wall_ms=wall, error=err, **vals)


def _eval_analytic_task(task: RowTask) -> SweepRow:
    return evaluate_row(task)


def _map_ordered(fn: Callable, tasks: Sequence, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, tasks))


def run_sweep(config: SweepConfig, what: str = "all", timing: bool = False) -> list[SweepRow]:
    """One row per beta. ``what`` selects the columns: ``q``, ``coverage``, ``ase`` or ``all``.

    Analytic grid points are distributed over the worker pool; Monte Carlo
    replications of each point are. Either way rows come back in grid order
    and do not depend on the worker count.
    """
    workers = config.workers or mcsim.default_workers()
    flags = dict(q=True, coverage=what in ("coverage", "all"), ase=what in ("ase", "all"))
    tasks = [RowTask(config, float(b), config.gamma_db, timing=timing, **flags) for b in config.betas]
    if config.engine == "analytic":
        rows = _map_ordered(_eval_analytic_task, tasks, workers)
    else:
        rows = [evaluate_row(t, mc_workers=workers) for t in tasks]
    for r in rows:
        if r.error is None:
            r.check()
    return rows


def run_gamma_sweep(config: SweepConfig, timing: bool = False) -> list[SweepRow]:
    """Coverage against the SINR threshold at the configured beta (one row per gamma)."""
    beta = config.params.beta
    rows = []
    model = AnalyticModel(config.params) if config.engine in ("analytic", "both") else None
    run = None
    if config.engine in ("mc", "both"):
        run = mcsim.run_replications(config.params, config.reps, config.seed, config.window_km,
                                     workers=config.workers or mcsim.default_workers())
    for gdb in config.gamma_grid_db:
        t0 = time.perf_counter()
        g = float(db_to_lin(gdb))
        vals: dict = {}
        err = None
        try:
            if model is not None:
                vals.update(q_analytic=model.boundary.q, cov_cell_analytic=float(model.coverage_cellular(g)),
                            cov_d2d_analytic=float(model.coverage_d2d(g)))
            if run is not None:
                skips = 0
                for mode, col in (("cellular", "cov_cell"), ("d2d", "cov_d2d")):
                    b = run.batch(mode)
                    skips += b.skips
                    if len(b.values):
                        est = mcsim.estimate_coverage(b, g)
                        vals[f"{col}_mc"] = est.value
                        vals[f"{col}_ci95"] = est.half_width
                vals["skips"] = skips
        except (NonConvergenceError, InversionError, FloatingPointError) as e:
            err = f"{type(e).__name__}: {e}"
        wall = (time.perf_counter() - t0) * 1e3 if timing else NAN
        rows.append(SweepRow(beta_dbm=beta, gamma_db=float(gdb), wall_ms=wall, error=err, **vals))
    return rows


# ----------------------------------------------------------- optimal threshold

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, tol: float = 0.5) -> tuple[float, float]:
    """Maximise a unimodal ``f`` on [lo, hi] to bracket width ``tol``; returns (x, f(x))."""
    cache: dict[float, float] = {}

    def F(x):
        if x not in cache:
            cache[x] = f(x)
        return cache[x]

    a, b = lo, hi
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    while b - a > tol:
        if F(c) >= F(d):
            b, d = d, c
            c = b - GOLDEN * (b - a)
        else:
            a, c = c, d
            d = a + GOLDEN * (b - a)
    best = max(cache, key=lambda x: (cache[x], -x))
    return best, cache[best]


def find_optimal_beta(config: SweepConfig, rows: Sequence[SweepRow] | None = None) -> OptimizationReport:
    """Maximise analytic total ASE over beta subject to cellular coverage >= the constraint.

    Grid evaluation, then golden-section refinement to 0.5 dBm inside the
    winning grid bracket. Infeasible points score ``-inf`` during refinement.
    Both the constrained and the unconstrained optimum are reported.
    """
    cfg = replace(config, engine="analytic")
    if rows is None:
        rows = run_sweep(cfg, what="all")
    rows = tuple(rows)
    level = cfg.coverage_constraint
    step = cfg.beta_step_db
    lo_all, hi_all = cfg.beta_min_dbm, cfg.beta_max_dbm
    evals: dict[float, SweepRow] = {r.beta_dbm: r for r in rows}

    def row_at(b: float) -> SweepRow:
        b = float(b)
        if b not in evals:
            evals[b] = evaluate_row(RowTask(cfg, b, cfg.gamma_db))
        return evals[b]

    def refine(b0: float, constrained: bool) -> tuple[float, float]:
        def score(b):
            r = row_at(b)
            if r.error is not None or math.isnan(r.ase_total):
                return -math.inf
            if constrained and not r.cov_cell_analytic >= level:
                return -math.inf
            return r.ase_total

        a, b = max(lo_all, b0 - step), min(hi_all, b0 + step)
        x, fx = golden_section_max(score, a, b, 0.5)
        if fx < score(b0):
            return b0, score(b0)
        return x, fx

    ok = [r for r in rows if r.error is None and not math.isnan(r.ase_total)]
    if not ok:
        raise NonConvergenceError("no grid point could be evaluated")
    uncon = max(ok, key=lambda r: r.ase_total)
    bu, au = refine(uncon.beta_dbm, False)
    feas = [r for r in ok if r.cov_cell_analytic >= level]
    if not feas:
        closest = max(ok, key=lambda r: r.cov_cell_analytic)
        return OptimizationReport(None, None, None, bu, au, level, False, closest, rows)
    win = max(feas, key=lambda r: r.ase_total)
    bs, as_ = refine(win.beta_dbm, True)
    return OptimizationReport(bs, as_, row_at(bs).cov_cell_analytic, bu, au, level, True, None, rows)


# ------------------------------------------------------------------- emission


def _num(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return f"{float(v):.6g}"


def _jnum(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return None
    if isinstance(v, (int, np.integer)):
        return int(v)
    return float(f"{float(v):.6g}")


def rows_to_csv(rows: Sequence[SweepRow]) -> str:
    with_gamma = any(r.gamma_db is not None for r in rows)
    cols = (("gamma_db",) if with_gamma else ()) + COLUMNS
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_num(getattr(r, c)) for c in cols])
    return buf.getvalue()


def rows_to_json(rows: Sequence[SweepRow], config: SweepConfig | None = None) -> str:
    with_gamma = any(r.gamma_db is not None for r in rows)
    cols = (("gamma_db",) if with_gamma else ()) + COLUMNS
    doc = {
        "config": config.as_dict() if config is not None else None,
        "rows": [{c: _jnum(getattr(r, c)) for c in cols} for r in rows],
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def rows_from_json(text: str) -> list[SweepRow]:
    doc = json.loads(text)
    names = {f.name for f in fields(SweepRow)}
    out = []
    for d in doc["rows"]:
        kw = {k: (NAN if v is None and k not in ("gamma_db",) else v) for k, v in d.items() if k in names}
        kw["skips"] = int(kw.get("skips") or 0) if not (isinstance(kw.get("skips"), float) and math.isnan(kw["skips"])) else 0
        out.append(SweepRow(**kw))
    return out


def emit_results(rows: Sequence[SweepRow], fmt: str = "csv", path: str | Path | None = None,
                 config: SweepConfig | None = None) -> str:
    """Serialise rows as CSV or JSON (6 significant digits); write to ``path`` when given."""
    if not rows:
        raise ValueError("no rows to emit")
    for r in rows:
        if r.error is None:
            r.check()
    if fmt == "csv":
        text = rows_to_csv(rows)
    elif fmt == "json":
        text = rows_to_json(rows, config)
    else:
        raise ValueError("format must be 'csv' or 'json'")
    if path is not None:
        Path(path).write_text(text)
    return text


def row_dict(row: SweepRow) -> dict:
    return asdict(row)
