"""Analytical engine: mode probability, coverage and ASE.

Everything is evaluated in equivalent-distance space, where shadowing has been
absorbed into the Poisson intensities (see :mod:`equivmap`). Coverage follows
the usual recipe: condition on the serving link, write the characteristic
function of the normalised interference as a product of Poisson
probability-generating functionals, invert it, and average over the serving
distance law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline

from .equivmap import IntensityTable, crossover_distance
from .netmodel import CONDITIONS, LOS, NLOS, Condition, NetworkParams, db_to_lin
from .numerics import CfInversionSpec, cf_invert_below_many
from .shotnoise import ShotNoiseTable, unit_intensity_table, unit_shot_table

CELLULAR = "cellular"
D2D = "d2d"
GROUP_RATIO = 10.0


@dataclass(frozen=True)
class AnalyticOptions:
    """Modelling switches and discretisation knobs.

    cu_exclusion
        ``"own-link"``: an interfering CU reaches the typical BS more weakly
        than its own serving BS (exact consequence of strongest-BS
        association). ``"serving"``: interfering CUs lie beyond the typical
        CU's equivalent distance.
    d2d_candidate
        Tier searched by a D2D receiver: ``"active"`` (active D2D
        transmitters, density rho (1-q) lambda_u / 2) or ``"d2d-ue"`` (every
        D2D-mode UE, density (1-q) lambda_u / 2).
    pc_form
        ``"corrected"`` uses R^2 in the arccos overlap law, ``"printed"`` uses R.
    """

    cu_exclusion: str = "own-link"
    d2d_candidate: str = "active"
    pc_form: str = "corrected"
    normalize_d2d_law: bool = True
    gl_order: int = 8
    panels_per_piece: int = 4
    psi_per_decade: int = 40
    cf: CfInversionSpec = field(default_factory=CfInversionSpec)
    cu_interference_scale: float = 1.0
    d2d_interference_scale: float = 1.0
    ase_step_db: float = 2.0
    ase_span_db: float = 80.0
    ase_tail_tol: float = 1e-4

    def __post_init__(self):
        if self.cu_exclusion not in ("own-link", "serving"):
            raise ValueError("cu_exclusion must be 'own-link' or 'serving'")
        if self.d2d_candidate not in ("active", "d2d-ue"):
            raise ValueError("d2d_candidate must be 'active' or 'd2d-ue'")
        if self.pc_form not in ("corrected", "printed"):
            raise ValueError("pc_form must be 'corrected' or 'printed'")


@dataclass(frozen=True)
class ModeBoundary:
    beta: float  # dBm
    q: float
    t_los: float  # km
    t_nlos: float  # km

    def t(self, cond: Condition) -> float:
        return self.t_los if cond is LOS else self.t_nlos


@dataclass(frozen=True)
class CoverageQuery:
    gamma: float  # linear
    mode: str
    params: NetworkParams

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.mode not in (CELLULAR, D2D):
            raise ValueError("mode must be 'cellular' or 'd2d'")


@dataclass(frozen=True)
class ServingDistanceLaw:
    """Quadrature representation of a serving-distance density.

    ``mass = weights * pdf`` are the probability masses attached to ``r``.
    """

    condition: Condition
    r: np.ndarray
    weights: np.ndarray
    pdf: np.ndarray
    normalization: float

    @property
    def mass(self) -> np.ndarray:
        return self.weights * self.pdf

    @property
    def total(self) -> float:
        return float(np.sum(self.mass))


def gauss_legendre(breaks: Sequence[float], order: int, panels_per_piece: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes on the sorted, de-duplicated ``breaks``."""
    b = np.unique(np.asarray(breaks, dtype=float))
    edges = [b[0]]
    for lo, hi in zip(b[:-1], b[1:]):
        edges.extend(np.linspace(lo, hi, panels_per_piece + 1)[1:])
    edges = np.asarray(edges)
    x, w = np.polynomial.legendre.leggauss(order)
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (hi + lo) + 0.5 * (hi - lo) * x[None, :]
    weights = 0.5 * (hi - lo) * w[None, :]
    return nodes.ravel(), weights.ravel()


def mode_boundary(params: NetworkParams, bs_tier: IntensityTable | None = None) -> ModeBoundary:
    prof = params.bs_profile
    if bs_tier is None:
        bs_tier = unit_intensity_table(prof, params.sigma_shadow_bs).scaled(params.lambda_b)
    level = params.beta_mw / params.p_b_mw
    t_l = float(prof.inverse_gain(LOS, level))
    t_n = float(prof.inverse_gain(NLOS, level))
    exponent = bs_tier.measure(LOS, t_l) + bs_tier.measure(NLOS, t_n)
    q = -math.expm1(-exponent)
    return ModeBoundary(params.beta, float(min(1.0, max(0.0, q))), t_l, t_n)


def cellular_mode_probability(params: NetworkParams, tables: IntensityTable | None = None) -> float:
    """P[max_b P_B A H r^-alpha > beta] for the typical UE."""
    return mode_boundary(params, tables).q


class ExponentCurve:
    """Cubic spline of a complex CF exponent Psi(s) in log s.

    Psi is linear in s below the tabulated range and grows like s^growth above.
    """

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], per_decade: int, growth: float = 0.5):
        coarse = np.logspace(-40, 40, 321)
        vals = fn(coarse)
        mag = np.abs(vals)
        lo_idx = int(np.argmax(mag > 1e-12)) if np.any(mag > 1e-12) else len(coarse) - 2
        hi_candidates = np.nonzero(vals.real > 60.0)[0]
        hi_idx = int(hi_candidates[0]) if len(hi_candidates) else len(coarse) - 1
        lo_idx = max(0, lo_idx - 1)
        hi_idx = min(len(coarse) - 1, max(hi_idx, lo_idx + 2))
        s_lo, s_hi = coarse[lo_idx], coarse[hi_idx]
        n = max(8, int(math.ceil(per_decade * math.log10(s_hi / s_lo))) + 1)
        self.log_s = np.linspace(math.log(s_lo), math.log(s_hi), n)
        self.values = fn(np.exp(self.log_s))
        self.spline = CubicSpline(self.log_s, self.values)
        self.growth = growth

    def __call__(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        ls = np.log(np.maximum(s, 1e-300))
        out = self.spline(np.clip(ls, self.log_s[0], self.log_s[-1]))
        lo = ls < self.log_s[0]
        if np.any(lo):
            out = np.where(lo, self.values[0] * np.exp(ls - self.log_s[0]), out)
        hi = ls > self.log_s[-1]
        if np.any(hi):
            out = np.where(hi, self.values[-1] * np.exp(self.growth * (ls - self.log_s[-1])), out)
        return np.where(s > 0, out, 0.0)


def _cf_from_exponent(psi: Callable[[np.ndarray], np.ndarray], scale: float):
    def phi(w):
        e = psi(np.asarray(w, dtype=float) / scale)
        return np.exp(-np.minimum(e.real, 700.0) - 1j * e.imag)

    return phi


def overlap_probability(r_d, r1, t, form: str = "corrected"):
    """Fraction of the circle of radius ``r_d`` around the receiver lying within ``t`` of a BS at ``r1``."""
    r_d = np.asarray(r_d, dtype=float)
    r1 = np.asarray(r1, dtype=float)
    first = r_d**2 if form == "corrected" else r_d
    with np.errstate(divide="ignore", invalid="ignore"):
        arg = (first + r1**2 - t**2) / (2.0 * r_d * r1)
    arg = np.where(np.isfinite(arg), arg, 1.0)
    return np.clip(np.arccos(np.clip(arg, -1.0, 1.0)) / math.pi, 0.0, 1.0)


def d2d_cellular_overlap_probability(r_d, r1, t, form: str = "corrected"):
    return overlap_probability(r_d, r1, t, form)


class AnalyticModel:
    """All analytic quantities for one scenario; tables are built lazily and shared."""

    def __init__(self, params: NetworkParams, options: AnalyticOptions | None = None):
        self.params = params
        self.opt = options or AnalyticOptions()
        p = params
        self.bs_unit = unit_intensity_table(p.bs_profile, p.sigma_shadow_bs)
        self.ue_unit = unit_intensity_table(p.ue_profile, p.sigma_shadow_ue)
        self.bs_tier = self.bs_unit.scaled(p.lambda_b)
        self.boundary = mode_boundary(p, self.bs_tier)
        q = self.boundary.q
        self.d2d_tx_density = 0.5 * p.rho * (1.0 - q) * p.lambda_u
        cand = self.d2d_tx_density if self.opt.d2d_candidate == "active" else 0.5 * (1.0 - q) * p.lambda_u
        self.candidate_density = cand
        self.candidates = self.ue_unit.scaled(max(cand, 1e-300))
        self._cache: dict = {}

    # ------------------------------------------------------------------ tables
    def _shot(self, where: str, cond: Condition) -> ShotNoiseTable:
        p = self.params
        if where == "bs":
            return unit_shot_table(p.bs_profile, p.sigma_shadow_bs, cond)
        return unit_shot_table(p.ue_profile, p.sigma_shadow_ue, cond)

    # ------------------------------------------------------- cellular serving law
    def cu_serving_distance_pdf(self, cond: Condition, r):
        r = np.asarray(r, dtype=float)
        t = self.boundary.t(cond)
        if np.any(r <= 0) or np.any(r > t * (1 + 1e-12)):
            raise ValueError(f"serving distance outside (0, {t:.6g}] for {cond.value}")
        return self._cu_pdf(cond, r)

    def _cu_pdf(self, cond: Condition, r: np.ndarray) -> np.ndarray:
        tier, q = self.bs_tier, self.boundary.q
        if q <= 0:
            return np.zeros_like(r)
        xb = crossover_distance(self.params.bs_profile, r, cond)
        void = np.exp(-tier.measure(cond, r) - tier.measure(cond.other, xb))
        return tier.density(cond, r) * void / q

    @cached_property
    def cu_law(self) -> dict[Condition, ServingDistanceLaw]:
        prof = self.params.bs_profile
        out = {}
        for cond in CONDITIONS:
            t = self.boundary.t(cond)
            breaks = [0.0, t]
            for d in (prof.los_cutoff, float(prof.inverse_gain(cond, prof.gain(cond.other, prof.los_cutoff)))):
                if 0 < d < t:
                    breaks.append(d)
            r, w = gauss_legendre(breaks, self.opt.gl_order, self.opt.panels_per_piece)
            pdf = self._cu_pdf(cond, r)
            out[cond] = ServingDistanceLaw(cond, r, w, pdf, self.boundary.q)
        return out

    @cached_property
    def cu_mixture(self) -> dict[str, np.ndarray]:
        """Interfering-CU transmit powers and serving gains as a discrete mixture."""
        p = self.params
        gains, masses = [], []
        for cond, law in self.cu_law.items():
            gains.append(p.bs_profile.gain(cond, law.r))
            masses.append(law.mass)
        g = np.concatenate(gains)
        m = np.concatenate(masses)
        m = m / m.sum() if m.sum() > 0 else m
        return {"gain": g, "mass": m, "power": p.p_0_mw * g ** (-p.epsilon)}

    # ----------------------------------------------------------- cellular CF
    def _psi_cu_at_bs(self, s: np.ndarray, r: float | None = None) -> np.ndarray:
        mix = self.cu_mixture
        p = self.params
        out = np.zeros(s.shape, dtype=complex)
        for cprime in CONDITIONS:
            shot = self._shot("bs", cprime)
            if self.opt.cu_exclusion == "own-link":
                lower = p.bs_profile.inverse_gain(cprime, mix["gain"])
            else:
                lower = np.full_like(mix["gain"], r)
            a = s[:, None] * mix["power"][None, :]
            out += shot(a, lower[None, :]) @ mix["mass"]
        return out * p.lambda_b * self.opt.cu_interference_scale

    def _psi_d2d_at_bs(self, s: np.ndarray) -> np.ndarray:
        p = self.params
        out = np.zeros(s.shape, dtype=complex)
        for cprime in CONDITIONS:
            out += self._shot("bs", cprime)(s * p.p_d_mw, self.boundary.t(cprime))
        return out * self.d2d_tx_density * self.opt.d2d_interference_scale

    def cellular_exponent(self, r: float | None = None) -> ExponentCurve:
        """Psi with phi_I(s) = exp(-Psi(s)) for the interference power at the typical BS."""
        key = ("cell", None if self.opt.cu_exclusion == "own-link" else float(r))
        if key not in self._cache:
            growth = 2.0 / self.params.bs_profile.exponent(NLOS)
            self._cache[key] = ExponentCurve(
                lambda s: self._psi_cu_at_bs(s, r) + self._psi_d2d_at_bs(s), self.opt.psi_per_decade, growth
            )
        return self._cache[key]

    def cellular_signal(self, cond: Condition, r) -> np.ndarray:
        p = self.params
        return p.p_0_mw * p.bs_profile.gain(cond, r) ** (1.0 - p.epsilon)

    def cf_inv_sinr_cellular(self, cond: Condition, omega, r: float):
        omega = np.asarray(omega, dtype=float)
        s_sig = float(self.cellular_signal(cond, r))
        psi = self.cellular_exponent(r)
        sign = np.sign(omega)
        e = psi(np.abs(omega) / s_sig)
        e = e.real + 1j * sign * e.imag
        return np.exp(-e + 1j * omega * self.params.noise_bs_mw / s_sig)

    def _coverage_given(self, psi, signal: float, noise: float, gammas: np.ndarray) -> np.ndarray:
        """P[I < S/gamma - N] for each gamma.

        Thresholds y = S/gamma - N are grouped so that each group spans at most
        a factor ``GROUP_RATIO``; every group is inverted in one pass with the
        variable rescaled so that its largest threshold is 1. Keeping the
        thresholds near 1 keeps the frequency range needed for convergence
        moderate regardless of the absolute signal level.
        """
        y = signal / gammas - noise
        out = np.zeros_like(gammas)
        order = [i for i in np.argsort(-y) if y[i] > 0]
        while order:
            top = y[order[0]]
            group = [i for i in order if y[i] >= top / GROUP_RATIO]
            order = order[len(group):]
            out[group] = cf_invert_below_many(_cf_from_exponent(psi, top), y[group] / top, self.opt.cf)
        return out

    def coverage_cellular(self, gamma) -> np.ndarray | float:
        gammas = np.atleast_1d(np.asarray(gamma, dtype=float))
        if np.any(gammas <= 0):
            raise ValueError("gamma must be positive")
        if self.boundary.q <= 0:
            return np.zeros_like(gammas) if np.ndim(gamma) else 0.0
        noise = self.params.noise_bs_mw
        out = np.zeros_like(gammas)
        for cond, law in self.cu_law.items():
            sig = self.cellular_signal(cond, law.r)
            for rk, sk, mk in zip(law.r, sig, law.mass):
                out += mk * self._coverage_given(self.cellular_exponent(rk), sk, noise, gammas)
        out = np.clip(out, 0.0, 1.0)
        return out if np.ndim(gamma) else float(out[0])

    # ------------------------------------------------------------ D2D serving law
    def _cand_terms(self, cond: Condition, x: np.ndarray):
        c = self.candidates
        xb = crossover_distance(self.params.ue_profile, np.maximum(x, 1e-12), cond)
        m = c.measure(cond, x) + c.measure(cond.other, xb)
        f1 = c.density(cond, np.maximum(x, 1e-12)) * np.exp(-m)
        return f1, f1 * m

    def _f_r1(self, cprime: Condition, r1: np.ndarray) -> np.ndarray:
        q = self.boundary.q
        tier = self.bs_tier
        xb = crossover_distance(self.params.bs_profile, r1, cprime)
        dens = tier.density(cprime, r1) * np.exp(-tier.measure(cprime, r1) - tier.measure(cprime.other, xb))
        return np.where(r1 > self.boundary.t(cprime), dens, 0.0) / max(1.0 - q, 1e-300)

    @cached_property
    def _d2d_support(self) -> float:
        grid = self.candidates.grid
        total = self.candidates.total_measure(grid)
        idx = np.searchsorted(total, 30.0)
        return float(grid[min(idx, len(grid) - 1)])

    @cached_property
    def _f1_cumulative(self):
        r_max = self._d2d_support
        x = np.concatenate([[0.0], np.geomspace(1e-6, r_max, 6000)])
        out = {}
        for cond in CONDITIONS:
            f1, _ = self._cand_terms(cond, x)
            f1[0] = 0.0
            out[cond] = (x, cumulative_trapezoid(f1, x, initial=0.0))
        return out

    def _F1(self, cond: Condition, r):
        x, cum = self._f1_cumulative[cond]
        return np.interp(r, x, cum, right=cum[-1])

    def _fallback_correction(self, cond: Condition, R: float) -> float:
        """Sum over BS conditions of int f_r1 int P_c (f2 - f1) dx dr1."""
        total = 0.0
        x_gl, w_gl = np.polynomial.legendre.leggauss(24)
        r_gl, rw_gl = np.polynomial.legendre.leggauss(32)
        for cprime in CONDITIONS:
            t = self.boundary.t(cprime)
            lo1, hi1 = t, R + t
            r1 = 0.5 * (hi1 + lo1) + 0.5 * (hi1 - lo1) * r_gl
            w1 = 0.5 * (hi1 - lo1) * rw_gl
            fr1 = self._f_r1(cprime, r1 * (1 + 1e-12))
            xl = np.maximum(r1 - t, 0.0)
            xh = np.minimum(R, r1 + t)
            span = np.maximum(xh - xl, 0.0)
            xs = 0.5 * (xh + xl)[:, None] + 0.5 * span[:, None] * x_gl[None, :]
            xw = 0.5 * span[:, None] * w_gl[None, :]
            f1, f2 = self._cand_terms(cond, xs.ravel())
            pc = overlap_probability(xs.ravel(), np.repeat(r1, len(x_gl)), t, self.opt.pc_form)
            inner = ((pc * (f2 - f1)).reshape(xs.shape) * xw).sum(axis=1)
            total += float(np.sum(w1 * fr1 * inner))
        return total

    def _d2d_cdf_raw(self, cond: Condition, R: float) -> float:
        if R <= 0:
            return 0.0
        return float(self._F1(cond, R)) + self._fallback_correction(cond, R)

    @cached_property
    def _d2d_norm(self) -> float:
        if not self.opt.normalize_d2d_law:
            return 1.0
        r_max = self._d2d_support
        return sum(self._d2d_cdf_raw(c, r_max) for c in CONDITIONS)

    def d2d_serving_distance_cdf(self, cond: Condition, R) -> float:
        """P[serving D2D link has condition ``cond`` and equivalent length < R]."""
        if R < 0:
            raise ValueError("R must be >= 0")
        return self._d2d_cdf_raw(cond, min(R, self._d2d_support)) / self._d2d_norm

    def d2d_serving_distance_pdf(self, cond: Condition, R: float) -> float:
        h = max(1e-3, 1e-3 * R)
        lo = max(R - h, 0.0)
        hi = R + h
        return (self.d2d_serving_distance_cdf(cond, hi) - self.d2d_serving_distance_cdf(cond, lo)) / (hi - lo)

    def d2d_serving_distance_pdf_exact(self, cond: Condition, R: float) -> float:
        """Closed-form derivative f1 (1 - Pbar) + f2 Pbar of the CDF, used as a cross-check."""
        f1, f2 = self._cand_terms(cond, np.array([R]))
        pbar = 0.0
        r_gl, rw_gl = np.polynomial.legendre.leggauss(64)
        for cprime in CONDITIONS:
            t = self.boundary.t(cprime)
            lo1, hi1 = max(t, R - t), R + t
            r1 = 0.5 * (hi1 + lo1) + 0.5 * (hi1 - lo1) * r_gl
            w1 = 0.5 * (hi1 - lo1) * rw_gl
            pbar += float(np.sum(w1 * self._f_r1(cprime, r1 * (1 + 1e-12)) * overlap_probability(R, r1, t, self.opt.pc_form)))
        return float(f1[0] * (1 - pbar) + f2[0] * pbar) / self._d2d_norm

    @cached_property
    def d2d_law(self) -> dict[Condition, ServingDistanceLaw]:
        prof = self.params.ue_profile
        c = self.candidates
        grid = c.grid
        total = c.total_measure(grid)
        breaks = [0.0, self._d2d_support]
        for level in (0.01, 0.05, 0.2, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0):
            idx = np.searchsorted(total, level)
            if 0 < idx < len(grid):
                breaks.append(float(grid[idx]))
        out = {}
        for cond in CONDITIONS:
            b = list(breaks)
            for d in (prof.los_cutoff, float(prof.inverse_gain(cond, prof.gain(cond.other, prof.los_cutoff)))):
                if 0 < d < self._d2d_support:
                    b.append(d)
            r, w = gauss_legendre(b, self.opt.gl_order, 1)
            pdf = np.array([self.d2d_serving_distance_pdf(cond, float(x)) for x in r])
            out[cond] = ServingDistanceLaw(cond, r, w, np.maximum(pdf, 0.0), self._d2d_norm)
        return out

    # ---------------------------------------------------------------- D2D CF
    def _psi_cu_at_ue(self, s: np.ndarray) -> np.ndarray:
        mix = self.cu_mixture
        out = np.zeros(s.shape, dtype=complex)
        for cprime in CONDITIONS:
            a = s[:, None] * mix["power"][None, :]
            out += self._shot("ue", cprime)(a, 0.0) @ mix["mass"]
        return out * self.params.lambda_b * self.opt.cu_interference_scale

    @cached_property
    def d2d_cu_exponent(self) -> ExponentCurve:
        growth = 2.0 / self.params.ue_profile.exponent(NLOS)
        return ExponentCurve(self._psi_cu_at_ue, self.opt.psi_per_decade, growth)

    def d2d_exponent(self, cond: Condition, R: float) -> ExponentCurve:
        """Psi for the interference at a D2D receiver whose serving link has equivalent length R."""
        p = self.params
        lower = {cond: R, cond.other: crossover_distance(p.ue_profile, R, cond)}
        scale = self.d2d_tx_density * self.opt.d2d_interference_scale
        cu = self.d2d_cu_exponent
        shots = {c: self._shot("ue", c) for c in CONDITIONS}

        def psi(s):
            out = cu(s)
            if scale > 0:
                for c in CONDITIONS:
                    out = out + scale * shots[c](s * p.p_d_mw, lower[c])
            return out

        return ExponentCurve(psi, self.opt.psi_per_decade, cu.growth)

    def d2d_signal(self, cond: Condition, R) -> np.ndarray:
        return self.params.p_d_mw * self.params.ue_profile.gain(cond, R)

    def cf_inv_sinr_d2d(self, cond: Condition, omega, R_d0: float):
        omega = np.asarray(omega, dtype=float)
        s_sig = float(self.d2d_signal(cond, R_d0))
        psi = self.d2d_exponent(cond, R_d0)
        sign = np.sign(omega)
        e = psi(np.abs(omega) / s_sig)
        e = e.real + 1j * sign * e.imag
        return np.exp(-e + 1j * omega * self.params.noise_ue_mw / s_sig)

    def coverage_d2d(self, gamma) -> np.ndarray | float:
        gammas = np.atleast_1d(np.asarray(gamma, dtype=float))
        if np.any(gammas <= 0):
            raise ValueError("gamma must be positive")
        noise = self.params.noise_ue_mw
        out = np.zeros_like(gammas)
        for cond, law in self.d2d_law.items():
            sig = self.d2d_signal(cond, law.r)
            for rk, sk, mk in zip(law.r, sig, law.mass):
                if mk <= 1e-12:
                    continue
                out += mk * self._coverage_given(self.d2d_exponent(cond, float(rk)), sk, noise, gammas)
        out = np.clip(out, 0.0, 1.0)
        return out if np.ndim(gamma) else float(out[0])

    def coverage(self, query: CoverageQuery) -> float:
        fn = self.coverage_cellular if query.mode == CELLULAR else self.coverage_d2d
        return fn(query.gamma)

    # -------------------------------------------------------------------- ASE
    def ase_cellular(self, gamma0: float) -> float:
        return ase_tier(self.params.lambda_b, gamma0, self.coverage_cellular, self.opt)

    def ase_d2d(self, gamma0: float) -> float:
        if self.d2d_tx_density <= 0:
            return 0.0
        return ase_tier(self.d2d_tx_density, gamma0, self.coverage_d2d, self.opt)

    def ase_total(self, gamma0: float) -> tuple[float, float, float]:
        cell = self.ase_cellular(gamma0)
        d2d = self.ase_d2d(gamma0)
        return cell + d2d, cell, d2d


def ase_tier(density: float, gamma0: float, coverage_fn: Callable, options: AnalyticOptions | None = None) -> float:
    """density * E[log2(1 + SINR) 1{SINR > gamma0}] written through the coverage curve.

    Integration by parts gives
    ``density [log2(1+g0) P(g0) + (1/ln 2) int_g0^inf P(x) / (1 + x) dx]``;
    the integral is done with Simpson's rule in ln x on a uniform dB grid and
    stops once the integrand ``P(x) log2(1+x)`` falls below ``ase_tail_tol``
    of the accumulated value.
    """
    opt = options or AnalyticOptions()
    if gamma0 <= 0:
        raise ValueError("gamma0 must be positive")
    if density == 0:
        return 0.0
    g0_db = 10 * math.log10(gamma0)
    step = opt.ase_step_db
    n_max = int(round(opt.ase_span_db / step))
    chunk = 4
    xs_db: list[float] = []
    ps: list[float] = []
    head = None
    k = 0
    while k <= n_max:
        block = [g0_db + step * j for j in range(k, min(k + chunk, n_max + 1))]
        vals = np.atleast_1d(coverage_fn(db_to_lin(np.array(block))))
        xs_db.extend(block)
        ps.extend(map(float, vals))
        k += len(block)
        if head is None:
            head = math.log2(1 + gamma0) * ps[0]
        x = db_to_lin(np.array(xs_db))
        integrand = np.array(ps) * x / (1 + x)
        acc = head + _simpson_uniform(integrand, step * math.log(10) / 10) / math.log(2)
        last = ps[-1] * math.log2(1 + x[-1])
        if len(ps) >= 3 and (len(ps) % 2 == 1) and last <= opt.ase_tail_tol * max(acc, 1e-300):
            break
    x = db_to_lin(np.array(xs_db))
    integrand = np.array(ps) * x / (1 + x)
    return density * (head + _simpson_uniform(integrand, step * math.log(10) / 10) / math.log(2))


def _simpson_uniform(y: np.ndarray, h: float) -> float:
    n = len(y)
    if n < 2:
        return 0.0
    if n % 2 == 0:
        # Simpson on the first n-1 points, trapezoid on the last interval
        return _simpson_uniform(y[:-1], h) + 0.5 * h * (y[-2] + y[-1])
    return h / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum())


# Functional interface mirroring the model methods -------------------------------------------


def cu_serving_distance_pdf(cond: Condition, r, model: AnalyticModel):
    return model.cu_serving_distance_pdf(cond, r)


def cf_inv_sinr_cellular(cond: Condition, omega, r: float, model: AnalyticModel):
    return model.cf_inv_sinr_cellular(cond, omega, r)


def coverage_cellular(gamma, params: NetworkParams, model: AnalyticModel | None = None):
    return (model or AnalyticModel(params)).coverage_cellular(gamma)


def d2d_serving_distance_cdf(cond: Condition, R: float, model: AnalyticModel) -> float:
    return model.d2d_serving_distance_cdf(cond, R)


def cf_inv_sinr_d2d(cond: Condition, omega, R_d0: float, model: AnalyticModel):
    return model.cf_inv_sinr_d2d(cond, omega, R_d0)


def coverage_d2d(gamma, params: NetworkParams, model: AnalyticModel | None = None):
    return (model or AnalyticModel(params)).coverage_d2d(gamma)


def ase_total(params: NetworkParams, model: AnalyticModel | None = None, gamma0: float | None = None):
    m = model or AnalyticModel(params)
    g0 = float(db_to_lin(params.gamma_0)) if gamma0 is None else gamma0
    return m.ase_total(g0)
