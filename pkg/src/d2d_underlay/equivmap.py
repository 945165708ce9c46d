"""Shadowing-to-distance equivalence for Poisson transmitter tiers.

A tier of transmitters with density ``lambda``, LoS probability ``p(r)`` and
i.i.d. lognormal marks ``H`` is mapped to points at equivalent distance
``t = g^-1(g(r) H)``, i.e. the distance at which the unshadowed gain equals the
shadowed one. The images of the LoS and NLoS sub-tiers are again Poisson, with
intensity measures

    Lambda_c([0, t]) = 2 pi lambda E_H[ int_0^rho_c(t, H) p_c(r) r dr ],
    rho_c(t, H) = g_c^-1(g_c(t) / H).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import ndtr

from .netmodel import CONDITIONS, LOS, NLOS, Condition, PathLossProfile

LN10_OVER_10 = math.log(10.0) / 10.0
HERMITE_NODES = 32


@lru_cache(maxsize=8)
def _hermite(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.hermite_e.hermegauss(n)
    return x, w / w.sum()


def shadow_nodes(sigma_db: float, n: int = HERMITE_NODES) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes ``H_k`` and weights for a zero-dB-mean lognormal."""
    if sigma_db < 0:
        raise ValueError("sigma_db must be >= 0")
    if sigma_db == 0:
        return np.ones(1), np.ones(1)
    x, w = _hermite(n)
    return np.exp(sigma_db * LN10_OVER_10 * x), w


def lognormal_expectation(integrand: Callable[[np.ndarray], np.ndarray], sigma_db: float, n: int = HERMITE_NODES):
    """E[f(H)] for ``10 log10 H ~ N(0, sigma_db^2)`` by Gauss-Hermite quadrature in ln H.

    ``integrand`` receives the array of nodes and may return extra trailing
    axes; the expectation is taken over the first axis.
    """
    h, w = shadow_nodes(sigma_db, n)
    vals = np.asarray(integrand(h))
    if vals.shape[:1] != h.shape:
        vals = np.asarray([integrand(hk) for hk in h])
    finite = np.isfinite(vals.reshape(len(h), -1)).all(axis=1)
    if not finite.all():
        k = int(np.argmin(finite))
        raise FloatingPointError(f"integrand not finite at shadow node H={h[k]:.6g} (index {k})")
    return np.tensordot(w, vals, axes=(0, 0))


@dataclass(frozen=True)
class TierSpec:
    base_density: float
    profile: PathLossProfile
    shadow_sigma: float
    density_scale: float = 1.0

    def __post_init__(self):
        if self.base_density <= 0:
            raise ValueError("base_density must be positive")
        if self.shadow_sigma < 0:
            raise ValueError("shadow_sigma must be >= 0")
        if not 0 <= self.density_scale <= 1:
            raise ValueError("density_scale must lie in [0, 1]")

    @property
    def density(self) -> float:
        return self.base_density * self.density_scale


def _rho(profile: PathLossProfile, cond: Condition, t: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Physical distance whose shadowed gain equals the unshadowed gain at ``t``; shape (nodes, len(t))."""
    t = np.asarray(t, dtype=float)
    if profile.is_single:
        alpha = profile.segments[0].coeffs(cond)[1]
        return h[:, None] ** (1.0 / alpha) * t[None, :]
    g = profile.gain(cond, np.maximum(t, 1e-300))
    return profile.inverse_gain(cond, g[None, :] / h[:, None])


def _unit_measure(profile, sigma, cond, t):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    h, w = shadow_nodes(sigma)
    rho = _rho(profile, cond, t, h)
    vals = profile.radial_moment(cond, rho)
    return 2.0 * math.pi * (w @ vals)


def _unit_density(profile, sigma, cond, t):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    h, w = shadow_nodes(sigma)
    rho = _rho(profile, cond, t, h)
    if profile.is_single:
        alpha = profile.segments[0].coeffs(cond)[1]
        drho = np.broadcast_to(h[:, None] ** (1.0 / alpha), rho.shape)
    else:
        drho = profile.gain_slope(cond, t)[None, :] / (h[:, None] * profile.gain_slope(cond, rho))
    vals = profile.condition_probability(cond, rho) * rho * drho
    return 2.0 * math.pi * (w @ vals)


def intensity_measure(tier: TierSpec, cond: Condition, t):
    """Lambda^cond([0, t]) of the tier after absorbing shadowing."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    out = tier.density * _unit_measure(tier.profile, tier.shadow_sigma, cond, np.where(t > 0, t, 1.0))
    out = np.where(np.atleast_1d(t) > 0, out, 0.0)
    return out.reshape(t.shape) if t.ndim else float(out[0])


def intensity_density(tier: TierSpec, cond: Condition, t):
    """lambda^cond(t) = d/dt Lambda^cond([0, t]), differentiated under the expectation."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("t must be > 0")
    out = tier.density * _unit_density(tier.profile, tier.shadow_sigma, cond, t)
    return out.reshape(t.shape) if t.ndim else float(out[0])


def equivalent_distance(r, shadow, alpha):
    r = np.asarray(r, dtype=float)
    shadow = np.asarray(shadow, dtype=float)
    if np.any(r <= 0) or np.any(shadow <= 0):
        raise ValueError("r and shadow must be positive")
    return shadow ** (-1.0 / alpha) * r


def crossover_distance(profile: PathLossProfile, r, cond_from: Condition):
    """Distance at which the opposite condition's gain equals ``cond_from``'s gain at ``r``.

    For a single power law this is ``ref (A2/A1)^(1/a2) (r/ref)^(a1/a2)``; for
    piecewise laws the piecewise inverse is taken segment by segment.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("r must be > 0")
    other = cond_from.other
    out = profile.inverse_gain(other, profile.gain(cond_from, r))
    if np.any(~np.isfinite(out)):
        raise ValueError("no crossover within the profile's monotone range")
    return out if out.ndim else float(out)


GRID_MIN_KM = 1e-4
GRID_MAX_KM = 50.0
GRID_POINTS = 2048


def default_grid() -> np.ndarray:
    return np.geomspace(GRID_MIN_KM, GRID_MAX_KM, GRID_POINTS)


@dataclass(frozen=True)
class IntensityTable:
    """Tabulated Lambda^L/NL([0,t]) and lambda^L/NL(t) of a tier.

    Values are stored for unit density; ``scale`` multiplies on lookup, so one
    table serves every tier sharing a (profile, sigma) pair. Lookups outside
    the grid fall back to direct evaluation.
    """

    grid: np.ndarray
    cum_los: np.ndarray
    cum_nlos: np.ndarray
    dens_los: np.ndarray
    dens_nlos: np.ndarray
    profile: PathLossProfile
    sigma: float
    scale: float = 1.0
    _interp: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def build(cls, profile: PathLossProfile, sigma: float, grid: np.ndarray | None = None) -> "IntensityTable":
        grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
        return cls(
            grid=grid,
            cum_los=_unit_measure(profile, sigma, LOS, grid),
            cum_nlos=_unit_measure(profile, sigma, NLOS, grid),
            dens_los=_unit_density(profile, sigma, LOS, grid),
            dens_nlos=_unit_density(profile, sigma, NLOS, grid),
            profile=profile,
            sigma=sigma,
        )

    @classmethod
    def for_tier(cls, tier: TierSpec) -> "IntensityTable":
        return cls.build(tier.profile, tier.shadow_sigma).scaled(tier.density)

    def scaled(self, factor: float) -> "IntensityTable":
        return IntensityTable(
            self.grid, self.cum_los, self.cum_nlos, self.dens_los, self.dens_nlos,
            self.profile, self.sigma, self.scale * factor, self._interp,
        )

    def _spline(self, kind: str, cond: Condition) -> PchipInterpolator:
        key = (kind, cond)
        if key not in self._interp:
            y = {("cum", LOS): self.cum_los, ("cum", NLOS): self.cum_nlos,
                 ("dens", LOS): self.dens_los, ("dens", NLOS): self.dens_nlos}[key]
            self._interp[key] = PchipInterpolator(np.log(self.grid), y, extrapolate=False)
        return self._interp[key]

    def _lookup(self, kind: str, cond: Condition, t):
        t = np.asarray(t, dtype=float)
        flat = np.atleast_1d(t).astype(float)
        out = np.zeros_like(flat)
        inside = (flat >= self.grid[0]) & (flat <= self.grid[-1])
        if np.any(inside):
            out[inside] = self._spline(kind, cond)(np.log(flat[inside]))
        outside = ~inside & (flat > 0)
        if np.any(outside):
            fn = _unit_measure if kind == "cum" else _unit_density
            out[outside] = fn(self.profile, self.sigma, cond, flat[outside])
        out *= self.scale
        return out.reshape(t.shape) if t.ndim else float(out[0])

    def measure(self, cond: Condition, t):
        return self._lookup("cum", cond, t)

    def density(self, cond: Condition, t):
        return self._lookup("dens", cond, t)

    def total_measure(self, t):
        return self.measure(LOS, t) + self.measure(NLOS, t)

    def void_probability(self, t):
        """P[no point of either sub-tier within equivalent distance t]."""
        return np.exp(-self.total_measure(t))


# Closed-form oracle for single power laws with the linear LoS law. Used by the
# tests and available for cross-checks; the engines use the quadrature above.
def _partial_moment(k: float, s: float, upper_h):
    """E[H^k 1{H <= upper_h}] for ln H ~ N(0, s^2)."""
    upper_h = np.asarray(upper_h, dtype=float)
    with np.errstate(divide="ignore"):
        z = np.log(upper_h) / s
    return np.exp(0.5 * (k * s) ** 2) * ndtr(z - k * s)


def closed_form_measure(profile: PathLossProfile, sigma_db: float, cond: Condition, t):
    """Exact Lambda per unit density for a single-segment profile with a finite positive LoS cutoff."""
    if not profile.is_single or not 0 < profile.los_cutoff < math.inf or sigma_db <= 0:
        raise ValueError("closed form needs a single segment, finite cutoff and sigma > 0")
    t = np.asarray(t, dtype=float)
    alpha = profile.segments[0].coeffs(cond)[1]
    d = profile.los_cutoff
    s = sigma_db * LN10_OVER_10
    h_star = (d / t) ** alpha  # rho <= d  <=>  H <= h_star
    m2_in = _partial_moment(2 / alpha, s, h_star)
    m3_in = _partial_moment(3 / alpha, s, h_star)
    p_out = 1.0 - ndtr(np.log(h_star) / s)
    los = 0.5 * t**2 * m2_in - t**3 * m3_in / (3 * d) + d**2 / 6 * p_out
    full = 0.5 * t**2 * np.exp(0.5 * (2 / alpha * s) ** 2)
    val = los if cond is LOS else full - los
    return 2.0 * math.pi * val
