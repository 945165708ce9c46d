"""Propagation, power control and SINR arithmetic.

All powers are linear mW internally, distances are km. dBm/dB only appear in
:class:`NetworkParams` fields and the conversion helpers.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np


class Condition(enum.Enum):
    LOS = "los"
    NLOS = "nlos"

    @property
    def other(self) -> "Condition":
        return Condition.NLOS if self is Condition.LOS else Condition.LOS


LOS = Condition.LOS
NLOS = Condition.NLOS
CONDITIONS = (LOS, NLOS)


def db_to_lin(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def lin_to_db(x):
    return 10.0 * np.log10(x)


dbm_to_mw = db_to_lin
mw_to_dbm = lin_to_db


@dataclass(frozen=True)
class Segment:
    """One piece of a piecewise power-law path loss.

    ``upper_km`` is the right end of the piece (``inf`` for the last one).
    ``a_*`` are linear gains at the profile's reference distance.
    """

    upper_km: float
    a_los: float
    alpha_los: float
    a_nlos: float
    alpha_nlos: float

    def coeffs(self, cond: Condition) -> tuple[float, float]:
        if cond is LOS:
            return self.a_los, self.alpha_los
        return self.a_nlos, self.alpha_nlos


@dataclass(frozen=True)
class PathLossProfile:
    """Piecewise LoS/NLoS attenuation law plus a linear LoS-probability law.

    The gain of condition ``c`` at distance ``r`` inside piece ``n`` is
    ``a_c * (r / ref_distance) ** -alpha_c``. ``los_cutoff`` is the distance at
    which the LoS probability ``1 - r/los_cutoff`` reaches zero; ``inf`` means
    always LoS and ``0`` means always NLoS.
    """

    segments: tuple[Segment, ...]
    los_cutoff: float
    ref_distance: float = 1e-3

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise ValueError("profile needs at least one segment")
        uppers = [s.upper_km for s in segs]
        if not math.isinf(uppers[-1]):
            raise ValueError("last segment must extend to infinity")
        if any(b <= a for a, b in zip(uppers, uppers[1:])) or uppers[0] <= 0:
            raise ValueError("break distances must be positive and strictly increasing")
        for s in segs:
            if min(s.a_los, s.a_nlos) <= 0 or min(s.alpha_los, s.alpha_nlos) <= 0:
                raise ValueError("gains and exponents must be positive")
        if self.los_cutoff < 0 or self.ref_distance <= 0:
            raise ValueError("los_cutoff must be >= 0 and ref_distance > 0")
        # the equivalence transform needs a strictly decreasing gain curve
        for cond in CONDITIONS:
            for left, right in zip(segs, segs[1:]):
                d = left.upper_km
                if self._piece_gain(right, cond, d) > self._piece_gain(left, cond, d) * (1 + 1e-12):
                    raise ValueError(f"{cond.value} gain increases across break at {d} km")

    @classmethod
    def single(cls, a_los, alpha_los, a_nlos, alpha_nlos, los_cutoff, ref_distance=1e-3):
        return cls((Segment(math.inf, a_los, alpha_los, a_nlos, alpha_nlos),), los_cutoff, ref_distance)

    @property
    def is_single(self) -> bool:
        return len(self.segments) == 1

    def _piece_gain(self, seg: Segment, cond: Condition, r):
        a, alpha = seg.coeffs(cond)
        return a * (r / self.ref_distance) ** (-alpha)

    def _segment_index(self, r):
        uppers = np.array([s.upper_km for s in self.segments])
        return np.searchsorted(uppers, r, side="left")

    def exponent(self, cond: Condition, r=None) -> float:
        if self.is_single or r is None:
            return self.segments[0].coeffs(cond)[1]
        return self.segments[int(self._segment_index(r))].coeffs(cond)[1]

    def los_probability(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise ValueError("distance must be non-negative")
        d = self.los_cutoff
        if d == 0:
            return np.zeros_like(r)
        if math.isinf(d):
            return np.ones_like(r)
        return np.clip(1.0 - r / d, 0.0, 1.0)

    def condition_probability(self, cond: Condition, r):
        p = self.los_probability(r)
        return p if cond is LOS else 1.0 - p

    def radial_moment(self, cond: Condition, rho):
        """Closed form of ``int_0^rho p_cond(r) r dr`` for the linear LoS law."""
        rho = np.asarray(rho, dtype=float)
        d = self.los_cutoff
        full = 0.5 * rho**2
        if d == 0:
            los = np.zeros_like(rho)
        elif math.isinf(d):
            los = full
        else:
            inner = np.minimum(rho, d)
            los = 0.5 * inner**2 - inner**3 / (3.0 * d)
        return los if cond is LOS else full - los

    def gain(self, cond: Condition, r):
        r = np.asarray(r, dtype=float)
        if self.is_single:
            return self._piece_gain(self.segments[0], cond, r)
        idx = self._segment_index(r)
        out = np.empty_like(r)
        for n, seg in enumerate(self.segments):
            m = idx == n
            out[m] = self._piece_gain(seg, cond, r[m])
        return out

    def inverse_gain(self, cond: Condition, g):
        """Distance at which the gain of ``cond`` equals ``g``."""
        g = np.asarray(g, dtype=float)

        def solve(seg):
            a, alpha = seg.coeffs(cond)
            return self.ref_distance * (a / g) ** (1.0 / alpha)

        if self.is_single:
            return solve(self.segments[0])
        out = np.full_like(g, np.nan)
        lower = 0.0
        for seg in self.segments:
            cand = solve(seg)
            m = (cand > lower) & (cand <= seg.upper_km) & np.isnan(out)
            out[m] = cand[m]
            lower = seg.upper_km
        # flat spots between pieces (discontinuous gain): snap to the break
        if np.any(np.isnan(out)):
            breaks = np.array([s.upper_km for s in self.segments[:-1]])
            for d in breaks:
                g_left = self.gain(cond, d)
                g_right = self.gain(cond, d * (1 + 1e-12))
                m = np.isnan(out) & (g <= g_left) & (g >= g_right)
                out[m] = d
        return out

    def gain_slope(self, cond: Condition, r):
        """d(gain)/dr, used by the Jacobian of the equivalence transform."""
        r = np.asarray(r, dtype=float)
        if self.is_single:
            alpha = self.segments[0].coeffs(cond)[1]
        else:
            idx = self._segment_index(r)
            alpha = np.array([s.coeffs(cond)[1] for s in self.segments])[idx]
        return -alpha * self.gain(cond, r) / r


class SingularityError(ValueError):
    pass


# Default constants. The A values are gains at 1 m; distances are km.
def default_bs_profile() -> PathLossProfile:
    return PathLossProfile.single(10**-3.08, 2.42, 10**-0.27, 4.28, los_cutoff=0.3)


def default_ue_profile() -> PathLossProfile:
    return PathLossProfile.single(10**-3.845, 2.0, 10**-5.578, 4.0, los_cutoff=0.1)


@dataclass(frozen=True)
class NetworkParams:
    lambda_b: float = 5.0  # BS / km^2
    lambda_u: float = 200.0  # UE / km^2
    p_b: float = 46.0  # dBm
    p_d: float = 10.0  # dBm
    p_0: float = -70.0  # dBm
    epsilon: float = 0.8
    beta: float = -50.0  # dBm
    gamma_0: float = 0.0  # dB
    rho: float = 0.1
    sigma_shadow_bs: float = 8.0  # dB
    sigma_shadow_ue: float = 7.0  # dB
    noise_bs: float = -114.0  # dBm
    noise_ue: float = -95.0  # dBm
    bandwidth: float = 10e6  # Hz, metadata
    carrier_freq: float = 2e9  # Hz, metadata
    bs_profile: PathLossProfile = field(default_factory=default_bs_profile)
    ue_profile: PathLossProfile = field(default_factory=default_ue_profile)
    cu_power_cap: Optional[float] = None  # dBm, off by default

    def __post_init__(self):
        if not (self.lambda_b > 0 and self.lambda_u > 0):
            raise ValueError("densities must be positive")
        if self.lambda_u < self.lambda_b:
            raise ValueError("lambda_u must be >= lambda_b (fully loaded network)")
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")
        if not 0 <= self.rho <= 1:
            raise ValueError("rho must lie in [0, 1]")
        if self.sigma_shadow_bs < 0 or self.sigma_shadow_ue < 0:
            raise ValueError("shadowing std-dev must be >= 0")
        for name in ("p_b", "p_d", "p_0", "beta", "gamma_0", "noise_bs", "noise_ue"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def with_(self, **kw) -> "NetworkParams":
        return replace(self, **kw)

    # linear views
    @property
    def p_b_mw(self) -> float:
        return float(dbm_to_mw(self.p_b))

    @property
    def p_d_mw(self) -> float:
        return float(dbm_to_mw(self.p_d))

    @property
    def p_0_mw(self) -> float:
        return float(dbm_to_mw(self.p_0))

    @property
    def beta_mw(self) -> float:
        return float(dbm_to_mw(self.beta))

    @property
    def noise_bs_mw(self) -> float:
        return float(dbm_to_mw(self.noise_bs))

    @property
    def noise_ue_mw(self) -> float:
        return float(dbm_to_mw(self.noise_ue))

    @property
    def cu_power_cap_mw(self) -> Optional[float]:
        return None if self.cu_power_cap is None else float(dbm_to_mw(self.cu_power_cap))

    @property
    def d2d_tx_fraction(self) -> float:
        """Fraction of D2D-mode UEs that are active transmitters."""
        return 0.5 * self.rho


def los_probability(profile: PathLossProfile, r):
    return profile.los_probability(r)


def path_gain(profile: PathLossProfile, cond: Condition, r):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise SingularityError("path gain is a far-field law; r must be > 0")
    return profile.gain(cond, r)


def received_power_dl(params: NetworkParams, profile: PathLossProfile, shadow, r, cond: Condition):
    shadow = np.asarray(shadow, dtype=float)
    if np.any(shadow <= 0):
        raise ValueError("shadow factor must be positive")
    return params.p_b_mw * shadow * path_gain(profile, cond, r)


def cu_transmit_power(params: NetworkParams, profile: PathLossProfile, shadow, r, cond: Condition):
    """Fractional channel inversion: ``P0 * (1 / (H g(r))) ** epsilon``."""
    shadow = np.asarray(shadow, dtype=float)
    if np.any(shadow <= 0):
        raise ValueError("shadow factor must be positive")
    p = params.p_0_mw * (shadow * path_gain(profile, cond, r)) ** (-params.epsilon)
    cap = params.cu_power_cap_mw
    return p if cap is None else np.minimum(p, cap)


def compute_sinr(signal, i_cellular, i_d2d, noise):
    noise = np.asarray(noise, dtype=float)
    if np.any(noise <= 0):
        raise ValueError("noise power must be positive")
    return np.asarray(signal, dtype=float) / (np.asarray(i_cellular) + np.asarray(i_d2d) + noise)


def segments_from_rows(rows: Sequence[Sequence[float]]) -> tuple[Segment, ...]:
    return tuple(Segment(*map(float, row)) for row in rows)
