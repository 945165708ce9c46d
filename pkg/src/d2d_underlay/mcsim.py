"""Monte Carlo ground truth for mode selection, coverage and ASE.

Each replication draws BSs and UEs as Poisson processes in a disc centred on
the origin. Per-link LoS and shadowing marks are counter-based hashes of
(replication key, link kind, endpoint ids), so a link keeps its marks for the
whole replication and marks do not depend on evaluation order. The hot loops
(mode assignment over all UE-BS pairs and the interference sums) are compiled
with numba.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.stats import norm

from .netmodel import NetworkParams, PathLossProfile

# Link kinds used as hash domains
_UE_BS = 1
_UE_UE = 2
_UE_ROLE = 3
_CU_PICK = 4
_TYPICAL = 5

CELLULAR, D2D_TX, D2D_RX, D2D_IDLE = 0, 1, 2, 3
LABELS = {CELLULAR: "cellular", D2D_TX: "d2d-tx", D2D_RX: "d2d-rx", D2D_IDLE: "d2d-idle"}

LN10_OVER_10 = math.log(10.0) / 10.0
SHADOW_BOUND_SIGMAS = 5.0  # pruning bound on the shadow mark, see assign_modes
TYPICAL_RADIUS_FRACTION = 0.2  # typical receivers are drawn from this fraction of the window radius


class InsufficientSamplesError(ValueError):
    pass


# --------------------------------------------------------------------------- marks


@numba.njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True)
def _uniform(key, kind, i, j, stream):
    """Counter-based uniform in (0, 1) for the tuple (key, kind, i, j, stream)."""
    z = _mix64(np.uint64(key) + np.uint64(0x9E3779B97F4A7C15) * np.uint64(kind + 1))
    z = _mix64(z ^ (np.uint64(i) * np.uint64(0xD6E8FEB86659FD93)))
    z = _mix64(z ^ (np.uint64(j) * np.uint64(0xA0761D6478BD642F) + np.uint64(stream)))
    return (np.float64(z >> np.uint64(11)) + 0.5) * (1.0 / 9007199254740992.0)


@numba.njit(cache=True)
def _normal(key, kind, i, j):
    u1 = _uniform(key, kind, i, j, 1)
    u2 = _uniform(key, kind, i, j, 2)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


@numba.njit(cache=True)
def _los_prob(r, cutoff):
    if cutoff <= 0.0:
        return 0.0
    if math.isinf(cutoff):
        return 1.0
    p = 1.0 - r / cutoff
    return min(1.0, max(0.0, p))


@numba.njit(cache=True)
def _gain(prof, los, r):
    """Piecewise gain; ``prof`` rows are (upper, a_los, alpha_los, a_nlos, alpha_nlos, ref)."""
    k = 0
    n = prof.shape[0]
    while k < n - 1 and r > prof[k, 0]:
        k += 1
    ref = prof[k, 5]
    if los:
        return prof[k, 1] * (r / ref) ** (-prof[k, 2])
    return prof[k, 3] * (r / ref) ** (-prof[k, 4])


@numba.njit(cache=True)
def _link_gain(key, kind, i, j, r, prof, cutoff, sigma_db):
    """Shadowed gain of link (i, j) at distance r, and its LoS flag."""
    pl = _los_prob(r, cutoff)
    los = pl > 0.0 and _uniform(key, kind, i, j, 0) < pl
    h = math.exp(LN10_OVER_10 * sigma_db * _normal(key, kind, i, j))
    return _gain(prof, los, max(r, 1e-9)) * h, los


def _profile_array(profile: PathLossProfile) -> np.ndarray:
    return np.array(
        [[s.upper_km, s.a_los, s.alpha_los, s.a_nlos, s.alpha_nlos, profile.ref_distance] for s in profile.segments],
        dtype=float,
    )


def _pair_key(i: np.ndarray, k: np.ndarray):
    return np.minimum(i, k), np.maximum(i, k)


# ------------------------------------------------------------------ data types


@dataclass(frozen=True)
class NetworkRealization:
    """Sampled BS and UE positions (km) plus the key that determines every per-link mark."""

    bs_points: np.ndarray
    ue_points: np.ndarray
    seed: int  # 64-bit mark key
    window_radius: float
    resampled: int = 0  # zero-BS draws discarded before this one

    def __post_init__(self):
        if self.window_radius <= 0:
            raise ValueError("window_radius must be positive")

    def shadow_db(self, kind: str, i, j, sigma_db: float) -> np.ndarray:
        """Shadow marks in dB for links (i, j); ``kind`` is ``"ue-bs"`` or ``"ue-ue"``."""
        code, i, j = self._link(kind, i, j)
        return sigma_db * _normal_vec(np.uint64(self.seed), code, i, j)

    def los_mark(self, kind: str, i, j, profile: PathLossProfile) -> np.ndarray:
        code, i, j = self._link(kind, i, j)
        r = self._distance(kind, i, j)
        return _uniform_vec(np.uint64(self.seed), code, i, j, 0) < profile.los_probability(r)

    def _link(self, kind, i, j):
        i = np.atleast_1d(np.asarray(i, dtype=np.int64))
        j = np.atleast_1d(np.asarray(j, dtype=np.int64))
        if kind == "ue-bs":
            return _UE_BS, i, j
        if kind == "ue-ue":
            a, b = _pair_key(i, j)
            return _UE_UE, a, b
        raise ValueError("kind must be 'ue-bs' or 'ue-ue'")

    def _distance(self, kind, i, j):
        other = self.bs_points if kind == "ue-bs" else self.ue_points
        return np.hypot(*(self.ue_points[i] - other[j]).T)


@numba.njit(cache=True)
def _normal_vec(key, kind, i, j):
    out = np.empty(i.shape[0])
    for n in range(i.shape[0]):
        out[n] = _normal(key, kind, i[n], j[n])
    return out


@numba.njit(cache=True)
def _uniform_vec(key, kind, i, j, stream):
    out = np.empty(i.shape[0])
    for n in range(i.shape[0]):
        out[n] = _uniform(key, kind, i[n], j[n], stream)
    return out


@dataclass(frozen=True)
class ModeAssignment:
    labels: np.ndarray  # int8 per UE, see LABELS
    serving_bs: np.ndarray  # strongest BS per UE (-1 if none evaluated)
    serving_gain: np.ndarray  # shadowed gain to the strongest BS
    mrss: np.ndarray  # P_B * serving_gain, mW

    @property
    def cellular(self) -> np.ndarray:
        return self.labels == CELLULAR


@dataclass(frozen=True)
class ScheduledLinks:
    cu_of_bs: np.ndarray  # scheduled CU per BS, -1 if the BS has no CU
    cu_power: np.ndarray  # transmit power (mW) per BS's scheduled CU, 0 if none
    active_tx: np.ndarray  # indices of active D2D transmitters
    rx: np.ndarray  # D2D receivers that were associated
    rx_serving_tx: np.ndarray  # strongest active transmitter for each of ``rx`` (-1 if none)
    rx_serving_gain: np.ndarray


@dataclass
class SinrSampleBatch:
    mode: str
    values: np.ndarray
    seeds: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.uint64))
    window_radius: float = 5.0
    skips: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if np.any(~np.isfinite(self.values)) or np.any(self.values < 0):
            raise ValueError("SINR samples must be finite and non-negative")


@dataclass(frozen=True)
class Estimate:
    value: float
    lo: float
    hi: float
    n: int

    @property
    def half_width(self) -> float:
        return 0.5 * (self.hi - self.lo)


# ------------------------------------------------------------------- sampling


def replication_key(master_seed: int, rep: int) -> tuple[np.random.Generator, int]:
    """Generator and 64-bit mark key for replication ``rep``; independent of execution order."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(rep),))
    key = int(ss.generate_state(1, np.uint64)[0])
    return np.random.Generator(np.random.Philox(ss)), key


def _disc_points(rng: np.random.Generator, density: float, radius: float) -> np.ndarray:
    n = rng.poisson(density * math.pi * radius**2)
    r = radius * np.sqrt(rng.random(n))
    th = 2 * math.pi * rng.random(n)
    return np.column_stack([r * np.cos(th), r * np.sin(th)])


def sample_network(params: NetworkParams, window_radius: float = 5.0, seed: int = 0, rep: int = 0) -> NetworkRealization:
    """Poisson BS and UE fields in a disc; zero-BS draws are redrawn and counted."""
    if window_radius <= 0:
        raise ValueError("window_radius must be positive")
    rng, key = replication_key(seed, rep)
    resampled = 0
    while True:
        bs = _disc_points(rng, params.lambda_b, window_radius)
        if len(bs):
            break
        resampled += 1
    ue = _disc_points(rng, params.lambda_u, window_radius)
    return NetworkRealization(bs, ue, key, window_radius, resampled)


# ----------------------------------------------------------- mode assignment


def _bs_grid(bs: np.ndarray, radius: float, cell: float):
    n_side = max(1, int(math.ceil(2 * radius / cell)))
    ix = np.clip(((bs[:, 0] + radius) / cell).astype(np.int64), 0, n_side - 1)
    iy = np.clip(((bs[:, 1] + radius) / cell).astype(np.int64), 0, n_side - 1)
    cid = ix * n_side + iy
    order = np.argsort(cid, kind="stable")
    starts = np.searchsorted(cid[order], np.arange(n_side * n_side + 1))
    return order.astype(np.int64), starts.astype(np.int64), n_side


@numba.njit(cache=True)
def _inv_gain(prof, los, g):
    """Largest distance at which the piecewise gain still reaches ``g``."""
    n = prof.shape[0]
    lower = 0.0
    for k in range(n):
        ref = prof[k, 5]
        a = prof[k, 1] if los else prof[k, 3]
        alpha = prof[k, 2] if los else prof[k, 4]
        r = ref * (a / g) ** (1.0 / alpha)
        if r <= prof[k, 0] or k == n - 1:
            return max(r, lower)
        lower = prof[k, 0]
    return lower


@numba.njit(cache=True)
def _reach(prof, cutoff, target, h_max):
    """Distance beyond which no link, even with shadow mark ``h_max``, reaches gain ``target``."""
    r = _inv_gain(prof, False, target / h_max)
    r_los = _inv_gain(prof, True, target / h_max)
    if cutoff <= 0.0:
        return r
    if not math.isinf(cutoff):
        r_los = min(r_los, cutoff)
    return max(r, r_los)


@numba.njit(cache=True)
def _assign_kernel(key, ue, bs, order, starts, n_side, radius, cell, prof, cutoff, sigma_db, level, h_max):
    n_ue = ue.shape[0]
    best_j = np.full(n_ue, -1, np.int64)
    best_g = np.zeros(n_ue)
    reach_level = _reach(prof, cutoff, level, h_max)
    for i in range(n_ue):
        x, y = ue[i, 0], ue[i, 1]
        cx = min(n_side - 1, max(0, int((x + radius) / cell)))
        cy = min(n_side - 1, max(0, int((y + radius) / cell)))
        bg = 0.0
        bj = -1
        reach = reach_level
        ring = 0
        while ring <= n_side:
            # every BS in ring k is at least (k - 1) * cell away
            if (ring - 1) * cell > reach:
                break
            for gx in range(cx - ring, cx + ring + 1):
                if gx < 0 or gx >= n_side:
                    continue
                for gy in range(cy - ring, cy + ring + 1):
                    if gy < 0 or gy >= n_side:
                        continue
                    if max(abs(gx - cx), abs(gy - cy)) != ring:
                        continue
                    c = gx * n_side + gy
                    for p in range(starts[c], starts[c + 1]):
                        j = order[p]
                        r = math.hypot(x - bs[j, 0], y - bs[j, 1])
                        if r > reach:
                            continue
                        pl = _los_prob(r, cutoff)
                        los = pl > 0.0 and _uniform(key, 1, i, j, 0) < pl
                        g0 = _gain(prof, los, max(r, 1e-9))
                        target = max(bg, level)
                        if g0 * h_max < target:
                            continue
                        g = g0 * math.exp(LN10_OVER_10 * sigma_db * _normal(key, 1, i, j))
                        if g > bg:
                            bg = g
                            bj = j
                            if bg > level:
                                reach = _reach(prof, cutoff, bg, h_max)
            ring += 1
        best_j[i] = bj
        best_g[i] = bg
    return best_j, best_g


@numba.njit(cache=True)
def _roles(key, n_ue, is_cell):
    labels = np.empty(n_ue, np.int8)
    for i in range(n_ue):
        if is_cell[i]:
            labels[i] = 0
        elif _uniform(key, 3, i, 0, 0) < 0.5:
            labels[i] = 1
        else:
            labels[i] = 2
    return labels


def assign_modes(realization: NetworkRealization, params: NetworkParams) -> ModeAssignment:
    """Strongest-BS association and MRSS mode selection for every UE.

    A UE is cellular iff its strongest received power strictly exceeds beta.
    BSs are visited ring by ring on a cell grid and skipped once even a shadow
    mark of ``SHADOW_BOUND_SIGMAS`` standard deviations could not beat the
    current best (or the mode threshold when that is higher). Only the
    identity of the maximum is pruned, never a mark itself, so the result is
    exact unless a skipped link carries a shadow mark beyond the bound.
    D2D-mode UEs whose strongest BS stays below beta keep the best BS seen.
    """
    prof = params.bs_profile
    arr = _profile_array(prof)
    level = params.beta_mw / params.p_b_mw
    h_max = 10 ** (0.1 * params.sigma_shadow_bs * SHADOW_BOUND_SIGMAS)
    cell = 0.25
    order, starts, n_side = _bs_grid(realization.bs_points, realization.window_radius, cell)
    bj, bg = _assign_kernel(
        np.uint64(realization.seed), realization.ue_points, realization.bs_points, order, starts, n_side,
        realization.window_radius, cell, arr, prof.los_cutoff, params.sigma_shadow_bs, level, h_max,
    )
    mrss = params.p_b_mw * bg
    labels = _roles(np.uint64(realization.seed), len(bg), mrss > params.beta_mw)
    # labels: 0 cellular, 1 D2D-Tx, 2 D2D-Rx (activation happens at scheduling)
    return ModeAssignment(labels, bj, bg, mrss)


# ----------------------------------------------------------------- scheduling


@numba.njit(cache=True)
def _strongest_tx(key, rx_idx, tx_idx, ue, prof, cutoff, sigma_db):
    n = rx_idx.shape[0]
    best = np.full(n, -1, np.int64)
    best_g = np.zeros(n)
    for a in range(n):
        k = rx_idx[a]
        for b in range(tx_idx.shape[0]):
            t = tx_idx[b]
            r = math.hypot(ue[k, 0] - ue[t, 0], ue[k, 1] - ue[t, 1])
            lo, hi = min(k, t), max(k, t)
            g, _ = _link_gain(key, 2, lo, hi, r, prof, cutoff, sigma_db)
            if g > best_g[a]:
                best_g[a] = g
                best[a] = t
    return best, best_g


def schedule_links(
    assignment: ModeAssignment,
    realization: NetworkRealization,
    params: NetworkParams,
    seed: int | None = None,
    receivers: np.ndarray | None = None,
) -> ScheduledLinks:
    """One uniformly chosen CU per BS, rho-thinned D2D transmitters, strongest-Tx association.

    Random choices are hashed from ``seed`` (the realization key by default).
    ``receivers`` restricts D2D association to a subset of receivers; by
    default every D2D receiver is associated.
    """
    key = np.uint64(realization.seed if seed is None else seed)
    n_ue = len(assignment.labels)
    n_bs = len(realization.bs_points)
    idx = np.arange(n_ue, dtype=np.int64)
    zeros = np.zeros(n_ue, dtype=np.int64)

    cu = idx[assignment.labels == CELLULAR]
    cu_of_bs = np.full(n_bs, -1, dtype=np.int64)
    if len(cu):
        prio = _uniform_vec(key, _CU_PICK, cu, zeros[: len(cu)], 0)
        order = np.lexsort((prio, assignment.serving_bs[cu]))
        srt = cu[order]
        first = np.ones(len(srt), dtype=bool)
        first[1:] = assignment.serving_bs[srt[1:]] != assignment.serving_bs[srt[:-1]]
        cu_of_bs[assignment.serving_bs[srt[first]]] = srt[first]
    has = cu_of_bs >= 0
    cu_power = np.zeros(n_bs)
    g = assignment.serving_gain[cu_of_bs[has]]
    p = params.p_0_mw * g ** (-params.epsilon)
    cap = params.cu_power_cap_mw
    cu_power[has] = p if cap is None else np.minimum(p, cap)

    tx = idx[assignment.labels == D2D_TX]
    active = tx[_uniform_vec(key, _UE_ROLE, tx, zeros[: len(tx)], 1) < params.rho] if len(tx) else tx
    rx = idx[assignment.labels == D2D_RX] if receivers is None else np.asarray(receivers, dtype=np.int64)
    prof = params.ue_profile
    best, best_g = _strongest_tx(
        key, rx, active, realization.ue_points, _profile_array(prof), prof.los_cutoff, params.sigma_shadow_ue
    )
    return ScheduledLinks(cu_of_bs, cu_power, active, rx, best, best_g)


# -------------------------------------------------------------- measurement


@numba.njit(cache=True)
def _interference_at_bs(key, j0, bs, ue, cu_of_bs, cu_power, active, p_d, prof, cutoff, sigma_db):
    i_cu = 0.0
    for j in range(cu_of_bs.shape[0]):
        u = cu_of_bs[j]
        if j == j0 or u < 0:
            continue
        r = math.hypot(ue[u, 0] - bs[j0, 0], ue[u, 1] - bs[j0, 1])
        g, _ = _link_gain(key, 1, u, j0, r, prof, cutoff, sigma_db)
        i_cu += cu_power[j] * g
    i_d = 0.0
    for b in range(active.shape[0]):
        t = active[b]
        r = math.hypot(ue[t, 0] - bs[j0, 0], ue[t, 1] - bs[j0, 1])
        g, _ = _link_gain(key, 1, t, j0, r, prof, cutoff, sigma_db)
        i_d += p_d * g
    return i_cu, i_d


@numba.njit(cache=True)
def _interference_at_ue(key, k, serving, ue, cu_of_bs, cu_power, active, p_d, prof, cutoff, sigma_db):
    i_cu = 0.0
    for j in range(cu_of_bs.shape[0]):
        u = cu_of_bs[j]
        if u < 0:
            continue
        r = math.hypot(ue[u, 0] - ue[k, 0], ue[u, 1] - ue[k, 1])
        g, _ = _link_gain(key, 2, min(u, k), max(u, k), r, prof, cutoff, sigma_db)
        i_cu += cu_power[j] * g
    i_d = 0.0
    for b in range(active.shape[0]):
        t = active[b]
        if t == serving:
            continue
        r = math.hypot(ue[t, 0] - ue[k, 0], ue[t, 1] - ue[k, 1])
        g, _ = _link_gain(key, 2, min(t, k), max(t, k), r, prof, cutoff, sigma_db)
        i_d += p_d * g
    return i_cu, i_d


@dataclass(frozen=True)
class ReplicationResult:
    rep: int
    sinr_cell: float  # nan when skipped
    sinr_d2d: float
    n_bs: int
    n_ue: int
    n_cellular: int
    n_active_tx: int
    resampled: int


def typical_index(points: np.ndarray, candidates: np.ndarray, realization: NetworkRealization, stream: int) -> int:
    """A uniformly chosen candidate inside the central disc of radius ``TYPICAL_RADIUS_FRACTION * R``.

    A point drawn uniformly from a Poisson process restricted to a region sees
    the rest of the process as under the Palm distribution, which is what the
    analytic engine assumes at its typical receiver. Taking the candidate
    nearest the centre would not: that point borders a disc known to be empty
    of other candidates. Falls back to the nearest candidate when the central
    disc holds none; returns -1 when there are no candidates.
    """
    candidates = np.asarray(candidates, dtype=np.int64)
    if len(candidates) == 0:
        return -1
    dist = np.hypot(*points[candidates].T)
    inner = candidates[dist <= TYPICAL_RADIUS_FRACTION * realization.window_radius]
    if len(inner) == 0:
        return int(candidates[np.argmin(dist)])
    u = _uniform(np.uint64(realization.seed), _TYPICAL, 0, 0, stream)
    return int(inner[min(int(u * len(inner)), len(inner) - 1)])


def measure_sinr(links: ScheduledLinks, realization: NetworkRealization, params: NetworkParams,
                 assignment: ModeAssignment) -> tuple[float, float]:
    """SINR at the typical BS and at the typical served D2D receiver (see :func:`typical_index`).

    Returns ``nan`` for a mode whose typical receiver has nothing to receive
    in this replication.
    """
    bs, ue, key = realization.bs_points, realization.ue_points, np.uint64(realization.seed)
    bprof, uprof = params.bs_profile, params.ue_profile
    j0 = typical_index(bs, np.arange(len(bs)), realization, 0)
    sinr_cell = math.nan
    if links.cu_of_bs[j0] >= 0:
        u0 = links.cu_of_bs[j0]
        signal = links.cu_power[j0] * assignment.serving_gain[u0]
        i_cu, i_d = _interference_at_bs(
            key, j0, bs, ue, links.cu_of_bs, links.cu_power, links.active_tx, params.p_d_mw,
            _profile_array(bprof), bprof.los_cutoff, params.sigma_shadow_bs,
        )
        sinr_cell = signal / (i_cu + i_d + params.noise_bs_mw)
    sinr_d2d = math.nan
    served = links.rx_serving_tx >= 0
    if np.any(served):
        cand = links.rx[served]
        k = typical_index(ue, cand, realization, 1)
        pick = int(np.nonzero(cand == k)[0][0])
        serving = int(links.rx_serving_tx[served][pick])
        signal = params.p_d_mw * links.rx_serving_gain[served][pick]
        i_cu, i_d = _interference_at_ue(
            key, k, serving, ue, links.cu_of_bs, links.cu_power, links.active_tx, params.p_d_mw,
            _profile_array(uprof), uprof.los_cutoff, params.sigma_shadow_ue,
        )
        sinr_d2d = signal / (i_cu + i_d + params.noise_ue_mw)
    return sinr_cell, sinr_d2d


def simulate_replication(params: NetworkParams, seed: int, rep: int, window_radius: float = 5.0) -> ReplicationResult:
    real = sample_network(params, window_radius, seed, rep)
    modes = assign_modes(real, params)
    # only the typical receiver is measured; associate just that one
    rx_all = np.nonzero(modes.labels == D2D_RX)[0]
    if len(rx_all):
        rx_all = np.array([typical_index(real.ue_points, rx_all, real, 1)], dtype=np.int64)
    links = schedule_links(modes, real, params, receivers=rx_all)
    sc, sd = measure_sinr(links, real, params, modes)
    return ReplicationResult(
        rep, sc, sd, len(real.bs_points), len(real.ue_points), int(np.sum(modes.cellular)),
        len(links.active_tx), real.resampled,
    )


def _run_chunk(args) -> list[ReplicationResult]:
    params, seed, reps, window = args
    return [simulate_replication(params, seed, r, window) for r in reps]


@dataclass(frozen=True)
class McRun:
    results: tuple[ReplicationResult, ...]
    window_radius: float

    def batch(self, mode: str) -> SinrSampleBatch:
        vals = np.array([r.sinr_cell if mode == "cellular" else r.sinr_d2d for r in self.results])
        ok = np.isfinite(vals)
        seeds = np.array([r.rep for r in self.results], dtype=np.uint64)[ok]
        return SinrSampleBatch(mode, vals[ok], seeds, self.window_radius, int(np.sum(~ok)))

    @property
    def skips(self) -> int:
        return self.batch("cellular").skips + self.batch("d2d").skips

    def cellular_fraction(self) -> float:
        n = sum(r.n_ue for r in self.results)
        return sum(r.n_cellular for r in self.results) / n if n else math.nan


def default_workers() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def run_replications(params: NetworkParams, reps: int, seed: int = 0, window_radius: float = 5.0,
                     workers: int | None = None, chunk: int = 64) -> McRun:
    """Run ``reps`` independent replications; aggregation is ordered by replication index."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    workers = default_workers() if workers is None else workers
    chunks = [(params, seed, range(s, min(s + chunk, reps)), window_radius) for s in range(0, reps, chunk)]
    if workers <= 1 or len(chunks) == 1:
        out = [r for c in chunks for r in _run_chunk(c)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            out = [r for part in ex.map(_run_chunk, chunks) for r in part]
    return McRun(tuple(out), window_radius)


# ------------------------------------------------------------ typical-UE samplers


@numba.njit(cache=True)
def _mrss_kernel(key, xy, counts, prof, cutoff, sigma_db):
    n = counts.shape[0]
    out = np.zeros(n)
    p = 0
    for t in range(n):
        best = 0.0
        for j in range(counts[t]):
            r = math.hypot(xy[p + j, 0], xy[p + j, 1])
            g, _ = _link_gain(key, 1, t, p + j, r, prof, cutoff, sigma_db)
            best = max(best, g)
        out[t] = best
        p += counts[t]
    return out


@numba.njit(cache=True)
def _min_equiv_kernel(key, xy, counts, prof, cutoff, sigma_db):
    """Minimum over BSs of g_c^-1(shadowed gain) in each link's own condition (single-segment laws)."""
    n = counts.shape[0]
    out = np.full(n, np.inf)
    p = 0
    for t in range(n):
        for j in range(counts[t]):
            r = math.hypot(xy[p + j, 0], xy[p + j, 1])
            los = _uniform(key, 1, t, p + j, 0) < _los_prob(r, cutoff)
            h = math.exp(LN10_OVER_10 * sigma_db * _normal(key, 1, t, p + j))
            alpha = prof[0, 2] if los else prof[0, 4]
            out[t] = min(out[t], h ** (-1.0 / alpha) * r)
        p += counts[t]
    return out


def _typical_ue_fields(params: NetworkParams, n: int, seed: int, radius: float):
    rng, key = replication_key(seed, 0)
    counts = rng.poisson(params.lambda_b * math.pi * radius**2, size=n)
    total = int(counts.sum())
    r = radius * np.sqrt(rng.random(total))
    th = 2 * math.pi * rng.random(total)
    return np.uint64(key), np.column_stack([r * np.cos(th), r * np.sin(th)]), counts


def sample_typical_mrss(params: NetworkParams, n: int, seed: int = 0, radius: float = 5.0) -> np.ndarray:
    """MRSS (mW) of a UE at the origin in ``n`` independent BS fields; 0 when a field is empty."""
    prof = params.bs_profile
    key, xy, counts = _typical_ue_fields(params, n, seed, radius)
    g = _mrss_kernel(key, xy, counts, _profile_array(prof), prof.los_cutoff, params.sigma_shadow_bs)
    return params.p_b_mw * g


def mode_fraction(params: NetworkParams, betas_dbm, n: int = 10_000, seed: int = 0, radius: float = 5.0):
    """Empirical cellular fraction at each beta from ``n`` typical-UE trials (common random numbers)."""
    mrss = sample_typical_mrss(params, n, seed, radius)
    betas = np.atleast_1d(np.asarray(betas_dbm, dtype=float))
    q = np.array([np.mean(mrss > 10 ** (b / 10)) for b in betas])
    se = np.sqrt(np.maximum(q * (1 - q), 1e-12) / n)
    return q, se


def sample_min_equivalent_distance(params: NetworkParams, n: int = 10_000, seed: int = 0,
                                   radius: float = 5.0) -> np.ndarray:
    """Nearest equivalent distance H^(-1/alpha_c) r of the BS tier seen from the origin."""
    prof = params.bs_profile
    if not prof.is_single:
        raise ValueError("equivalent-distance sampler needs a single-segment profile")
    key, xy, counts = _typical_ue_fields(params, n, seed, radius)
    return _min_equiv_kernel(key, xy, counts, _profile_array(prof), prof.los_cutoff, params.sigma_shadow_bs)


# ------------------------------------------------------------------ estimators


def wilson_interval(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    if n <= 0:
        raise InsufficientSamplesError("no samples")
    z = norm.ppf(0.5 + level / 2)
    p = k / n
    den = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    # the bounds at k = 0 and k = n are exactly 0 and 1; keep rounding from moving them
    lo = 0.0 if k == 0 else max(0.0, min(p, centre - half))
    hi = 1.0 if k == n else min(1.0, max(p, centre + half))
    return lo, hi


def estimate_coverage(batch: SinrSampleBatch, gamma: float) -> Estimate:
    n = len(batch.values)
    if n == 0:
        raise InsufficientSamplesError(f"no {batch.mode} samples")
    k = int(np.sum(batch.values > gamma))
    lo, hi = wilson_interval(k, n)
    return Estimate(k / n, lo, hi, n)


def estimate_ase(batch: SinrSampleBatch, density: float, gamma0: float, n_boot: int = 1000,
                 seed: int = 0) -> Estimate:
    """density * mean(log2(1 + SINR) 1{SINR > gamma0}) with a percentile bootstrap interval."""
    n = len(batch.values)
    if n == 0:
        raise InsufficientSamplesError(f"no {batch.mode} samples")
    se = np.where(batch.values > gamma0, np.log2(1 + batch.values), 0.0)
    value = density * float(se.mean())
    rng = np.random.default_rng(seed)
    boots = np.array([se[rng.integers(0, n, n)].mean() for _ in range(n_boot)]) * density
    lo, hi = np.percentile(boots, [2.5, 97.5])
    return Estimate(value, float(lo), float(hi), n)
