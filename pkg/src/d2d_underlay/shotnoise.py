"""Tabulated shot-noise exponents of Poisson tiers in equivalent-distance space.

For a tier with equivalent density ``lambda(v)`` and gain ``g(v)`` the
characteristic-function exponent of the interference it produces from beyond
``lower`` is

    E(a, lower) = int_lower^inf (1 - exp(i a g(v))) lambda(v) dv,

where ``a`` folds together frequency and transmit power. Tables are built per
unit density; callers scale by the tier density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .equivmap import IntensityTable
from .netmodel import Condition, PathLossProfile


def _filon_weights(theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """F0 = int_0^1 e^{i theta x} dx and F1 = int_0^1 x e^{i theta x} dx, stable near 0."""
    theta = np.asarray(theta, dtype=float)
    small = np.abs(theta) < 1e-2
    ts = np.where(small, 0.0, theta)
    e = np.exp(1j * ts)
    with np.errstate(divide="ignore", invalid="ignore"):
        f0 = np.where(small, 0, (e - 1.0) / (1j * ts))
        f1 = np.where(small, 0, e / (1j * ts) + (e - 1.0) / ts**2)
    th = theta
    f0s = 1 + 1j * th / 2 - th**2 / 6 - 1j * th**3 / 24 + th**4 / 120
    f1s = 0.5 + 1j * th / 3 - th**2 / 8 - 1j * th**3 / 30 + th**4 / 144
    return np.where(small, f0s, f0), np.where(small, f1s, f1)


@dataclass
class ShotNoiseTable:
    """E(a, lower) on a log-a grid and the tier's equivalent-distance grid.

    Along ``a`` the table is interpolated with 4-point Lagrange polynomials in
    log a; along ``lower`` linearly. Below the grid E is linear in ``a``;
    above it E is continued with the far-field growth ``a^(2/alpha)``.
    """

    log_a: np.ndarray
    v: np.ndarray
    values: np.ndarray  # shape (len(log_a), len(v)), per unit density
    growth: float
    cum: np.ndarray  # Lambda([0, v]) per unit density on ``v``
    gain: np.ndarray  # g(v)

    @classmethod
    def build(cls, table: IntensityTable, cond: Condition, per_decade: int = 20, stride: int = 2) -> "ShotNoiseTable":
        unit = table.scaled(1.0 / table.scale)
        v = unit.grid
        lam = unit.density(cond, v)
        cum = unit.measure(cond, v)
        prof: PathLossProfile = unit.profile
        g = prof.gain(cond, v)
        h = lam / np.abs(prof.gain_slope(cond, v))  # lambda dv = h dl with l = g(v)
        alpha = prof.exponent(cond)

        a_lo = 1e-7 / g[0]
        a_hi = 1e6 / g[-1]
        n_a = int(math.ceil(per_decade * math.log10(a_hi / a_lo))) + 1
        log_a = np.linspace(math.log(a_lo), math.log(a_hi), n_a)

        # segment j spans v[j] .. v[j+1]; in level space l from g[j+1] up to g[j]
        l1 = g[1:]
        dl = g[:-1] - g[1:]
        h1 = h[1:]
        dh = h[:-1] - h[1:]
        lin = dl * (h1 + 0.5 * dh)
        d_cum = np.diff(cum)
        keep = slice(None, None, stride)
        values = np.empty((n_a, len(v[keep])), dtype=complex)
        for i, la in enumerate(log_a):
            a = math.exp(la)
            f0, f1 = _filon_weights(a * dl)
            osc = dl * np.exp(1j * a * l1) * (h1 * f0 + dh * f1)
            with np.errstate(invalid="ignore", divide="ignore"):
                ratio = np.where(lin > 0, osc / lin, 1.0)
            # 1 - <e^{iag}> weighted by the exact measure increment; expm1 keeps
            # precision when the phase is tiny
            small = a * g[:-1] < 1e-3
            mean_phase = np.where(small, -np.expm1(1j * a * 0.5 * (g[:-1] + g[1:])), 1.0 - ratio)
            seg = d_cum * mean_phase
            tail = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
            values[i] = tail[keep]
        return cls(log_a=log_a, v=v[keep], values=values, growth=2.0 / alpha, cum=cum[keep], gain=g[keep])

    def __call__(self, a, lower) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        lower = np.asarray(lower, dtype=float)
        a, lower = np.broadcast_arrays(a, lower)
        la = np.log(np.maximum(a, 1e-300))
        step = self.log_a[1] - self.log_a[0]
        n_a = len(self.log_a)
        pos = (la - self.log_a[0]) / step
        i = np.clip(np.floor(pos).astype(int), 1, n_a - 3)
        t = np.clip(pos, 0.0, n_a - 1.0) - i

        lv = np.log(np.maximum(lower, self.v[0]))
        vstep = math.log(self.v[1] / self.v[0])
        vpos = np.clip((lv - math.log(self.v[0])) / vstep, 0.0, len(self.v) - 1.0)
        j = np.minimum(np.floor(vpos).astype(int), len(self.v) - 2)
        u = vpos - j

        # tabulated value at the grid point just above ``lower`` plus the
        # partial segment, whose phase is taken at its geometric midpoint
        j1 = j + 1
        w = (
            -t * (t - 1) * (t - 2) / 6,
            (t + 1) * (t - 1) * (t - 2) / 2,
            -(t + 1) * t * (t - 2) / 2,
            (t + 1) * t * (t - 1) / 6,
        )
        out = np.zeros(a.shape, dtype=complex)
        for k, wk in zip(range(-1, 3), w):
            out += wk * self.values[i + k, j1]
        below = pos < 0
        if np.any(below):
            out[below] = self.values[0, j1[below]] * np.exp(la[below] - self.log_a[0])
        above = pos > n_a - 1
        if np.any(above):
            out[above] = self.values[-1, j1[above]] * np.exp(self.growth * (la[above] - self.log_a[-1]))
        d_cum = (1 - u) * (self.cum[j1] - self.cum[j])
        g_mid = np.sqrt(self.gain[j1] * (self.gain[j] ** (1 - u) * self.gain[j1] ** u))
        out += d_cum * -np.expm1(1j * a * g_mid)
        out[lower > self.v[-1]] = 0.0
        return out


@lru_cache(maxsize=16)
def unit_intensity_table(profile: PathLossProfile, sigma: float) -> IntensityTable:
    return IntensityTable.build(profile, sigma)


@lru_cache(maxsize=16)
def unit_shot_table(profile: PathLossProfile, sigma: float, cond: Condition) -> ShotNoiseTable:
    return ShotNoiseTable.build(unit_intensity_table(profile, sigma), cond)
