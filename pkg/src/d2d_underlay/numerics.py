"""Quadrature, characteristic-function inversion and bracketed root finding."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, optimize


class NonConvergenceError(ArithmeticError):
    """Raised when a numerical routine runs out of budget; keeps the best estimate."""

    def __init__(self, message: str, best_estimate: float = float("nan")):
        super().__init__(message)
        self.best_estimate = best_estimate


class InversionError(ArithmeticError):
    pass


class BracketError(ValueError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_subdivisions: int = 200

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float


def _wynn_epsilon(partial_sums: np.ndarray) -> tuple[float, float]:
    """Wynn's epsilon extrapolation of a sequence of partial sums.

    Returns the last even-column estimate and the change from the previous one.
    """
    s = list(map(float, partial_sums))
    n = len(s)
    eps_prev = [0.0] * (n + 1)
    eps_cur = s[:]
    best, prev_best = s[-1], s[-2] if n > 1 else s[-1]
    k = 0
    while len(eps_cur) > 1:
        nxt = []
        for i in range(len(eps_cur) - 1):
            d = eps_cur[i + 1] - eps_cur[i]
            if d == 0.0:
                nxt.append(math.inf)
            else:
                nxt.append(eps_prev[i + 1] + 1.0 / d)
        eps_prev, eps_cur = eps_cur, nxt
        k += 1
        if k % 2 == 0 and eps_cur and math.isfinite(eps_cur[-1]):
            prev_best = eps_cur[-2] if len(eps_cur) > 1 else best
            best = eps_cur[-1]
    return best, abs(best - prev_best)


def integrate_adaptive(
    f: Callable[[float], float], a: float, b: float, spec: QuadratureSpec = QuadratureSpec()
) -> QuadResult:
    """Adaptive Gauss-Kronrod quadrature on [a, b]; ``b`` may be ``inf``.

    Semi-infinite ranges go through QUADPACK's algebraic transform first. When
    that does not converge (slowly decaying oscillatory integrands such as
    sin(x)/x), the tail is split into unit-period panels and the partial sums
    are accelerated with Wynn's epsilon algorithm.
    """
    if not a < b:
        raise ValueError("need a < b")
    target = lambda v: max(spec.abs_tol, spec.rel_tol * abs(v))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(
            f, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=spec.max_subdivisions
        )
    if err <= target(val):
        return QuadResult(float(val), float(err))
    if not math.isinf(b):
        raise NonConvergenceError(f"quadrature on [{a}, {b}] did not converge (err={err:.3g})", val)

    panel = math.pi
    partial, total = [], 0.0
    lo = a
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for _ in range(spec.max_subdivisions):
            v, _ = integrate.quad(f, lo, lo + panel, epsabs=spec.abs_tol * 1e-2, epsrel=spec.rel_tol * 1e-2)
            total += v
            partial.append(total)
            lo += panel
            if len(partial) >= 12 and len(partial) % 4 == 0:
                est, change = _wynn_epsilon(np.array(partial[-12:]))
                if change <= target(est):
                    return QuadResult(est, change)
    est, change = _wynn_epsilon(np.array(partial[-12:]))
    raise NonConvergenceError("semi-infinite quadrature did not converge", est)


# Gauss-Kronrod 7/15 nodes and weights on [-1, 1]
_GK_X = np.array(
    [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ]
)
_GK_WK = np.array(
    [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ]
)
_GK_WG = np.array(
    [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ]
)
GK15_NODES = np.concatenate([-_GK_X[:-1], _GK_X[::-1]])
GK15_WEIGHTS = np.concatenate([_GK_WK[:-1], _GK_WK[::-1]])
# Gauss 7-point weights placed on the odd Kronrod nodes (indices 1,3,...,13)
G7_WEIGHTS = np.zeros(15)
G7_WEIGHTS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_GK_WG, _GK_WG[-2::-1]])


@dataclass(frozen=True)
class CfInversionSpec:
    """Discretisation of the frequency integral.

    ``panel_count`` is the number of GK15 panels per period of the kernel
    ``exp(-i w x)``; the default 8 gives panels of width ``pi / (4 max(x, 1))``.
    """

    omega_max: float = 1e3
    omega_tail_tol: float = 1e-6
    panel_count: int = 8
    max_extension: float = 64.0
    abs_tol: float = 1e-5
    panel_tol: float = 1e-10
    max_depth: int = 10
    range_tol: float = 1e-3

    def __post_init__(self):
        if self.omega_max <= 0:
            raise ValueError("omega_max must be positive")
        if not 0 < self.omega_tail_tol < 1:
            raise ValueError("omega_tail_tol must lie in (0, 1)")
        if self.panel_count < 1 or self.max_extension < 1:
            raise ValueError("panel_count and max_extension must be >= 1")


def _panel_sums(phi_vals: np.ndarray, mid: np.ndarray, half: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """GK15 and G7 sums of ``-Im[e^{-iwx} phi(w)] / w`` over equal-width panels.

    Since ``w = mid + half * node``, the kernel factors into a panel phase
    ``e^{-i mid x}`` and a node phase ``e^{-i half node x}``, so each rule is
    one complex matrix product. The integrand equals the folded inversion
    kernel ``Re[(1 - e^{-iwx}) phi / (iw)]`` minus ``Im[phi]/w``; the latter
    integrates to pi/2 for a non-negative variable without an atom at zero,
    which is what lets the truncated tail be closed with a single boundary term.
    """
    w = mid[:, None] + half * GK15_NODES[None, :]
    a = phi_vals / w  # (panels, 15)
    node_phase = np.exp(-1j * half * GK15_NODES[:, None] * x[None, :])  # (15, nx)
    b = np.concatenate([GK15_WEIGHTS[:, None] * node_phase, G7_WEIGHTS[:, None] * node_phase], axis=1)
    sums = (a @ b) * np.tile(np.exp(-1j * mid[:, None] * x[None, :]), 2)
    sums = -half * sums.imag
    nx = len(x)
    return sums[:, :nx], sums[:, nx:]


def _gk_panels(phi, x, lo: np.ndarray, hi: np.ndarray, spec: CfInversionSpec, depth: int = 0) -> np.ndarray:
    """Integrate the kernel over equal-width panels with GK15 and local bisection; one result per threshold."""
    mid = 0.5 * (lo + hi)
    half = 0.5 * float(hi[0] - lo[0])
    w = mid[:, None] + half * GK15_NODES[None, :]
    phi_vals = np.asarray(phi(w.ravel()), dtype=complex).reshape(w.shape)
    if not np.all(np.isfinite(phi_vals)):
        bad = w[~np.isfinite(phi_vals)][0]
        raise InversionError(f"characteristic function not finite at omega={bad:.6g}")
    k, g = _panel_sums(phi_vals, mid, half, x)
    bad = np.max(np.abs(k - g), axis=1) > spec.panel_tol
    total = k[~bad].sum(axis=0)
    if np.any(bad):
        if depth >= spec.max_depth:
            total = total + k[bad].sum(axis=0)
        else:
            l, h = lo[bad], hi[bad]
            m = 0.5 * (l + h)
            total = total + _gk_panels(phi, x, np.concatenate([l, m]), np.concatenate([m, h]), spec, depth + 1)
    return total


def _tail_estimate(phi, x: np.ndarray, omega: float, delta: float) -> np.ndarray:
    """Boundary-term estimate of ``int_omega^inf -Im[e^{-iwx} phi(w)] / w dw``.

    ``phi`` is modelled locally as ``phi(omega) exp(mu (w - omega))``.
    """
    p1, p0 = np.asarray(phi(np.array([omega, omega - delta])), dtype=complex)
    if p1 == 0:
        return np.zeros_like(x)
    mu = (p1 - p0) / (delta * p1)
    if mu.real > 0:
        mu = complex(0.0, mu.imag)
    denom = omega * (1j * x - mu)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = -np.imag(np.exp(-1j * omega * x) * p1 / denom)
    return np.where(np.abs(denom) > 0, out, 0.0)


def cf_invert_below_many(
    phi: Callable[[np.ndarray], np.ndarray], xs, spec: CfInversionSpec = CfInversionSpec()
) -> np.ndarray:
    """P[X < x] at every threshold in ``xs`` from one shared pass over the frequency axis.

    ``phi`` must accept an array of frequencies. The two-sided inversion
    integral is folded onto [0, omega_max] using Hermitian symmetry and
    evaluated with GK15 panels sized for the largest threshold, or narrower
    when ``phi`` moves by more than 1/2 within one panel. Integration
    stops early once ``|phi|`` drops below ``omega_tail_tol`` at the end of a
    batch of panels. Otherwise the truncated tail is closed with a boundary
    term, and the range is doubled (up to ``max_extension * omega_max``)
    while two closures taken at different cut points still disagree by more
    than ``abs_tol``.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    out = np.zeros(xs.shape)
    pos = xs > 0
    if not np.any(pos):
        return out
    x = xs[pos]
    width = 2.0 * math.pi / (spec.panel_count * max(float(x.max()), 1.0))
    # a variable much larger than the thresholds has a CF that turns over
    # within the first panel; shrink the panels to that scale
    for _ in range(60):
        if abs(1.0 - complex(np.asarray(phi(np.array([width])))[0])) <= 0.5:
            break
        width *= 0.5
    delta = width / 8.0
    hard_cap = spec.omega_max * spec.max_extension
    body = np.zeros_like(x)
    start = 0.0
    batch = 64
    limit = spec.omega_max
    decayed = False
    while True:
        n = max(1, min(batch, int(math.ceil((limit - start) / width))))
        edges = start + width * np.arange(n + 1)
        body += _gk_panels(phi, x, edges[:-1], edges[1:], spec)
        start = float(edges[-1])
        probe = np.linspace(edges[-2], edges[-1], 5)
        if np.max(np.abs(phi(probe))) < spec.omega_tail_tol:
            decayed = True
            break
        batch = min(batch * 2, 4096)
        if start < limit:
            continue
        # closure consistency check: the same total with an earlier cut point
        cut = start - 0.37 * width
        part = _gk_panels(phi, x, np.array([cut]), np.array([start]), spec)
        t_end = _tail_estimate(phi, x, start, delta)
        t_cut = _tail_estimate(phi, x, cut, delta)
        if np.max(np.abs(t_end - (t_cut - part))) <= spec.abs_tol * math.pi or limit >= hard_cap:
            body += t_end
            break
        limit = min(limit * 2.0, hard_cap)
    if decayed:
        body += _tail_estimate(phi, x, start, delta)
    p = 0.5 + body / math.pi
    bad = (p < -spec.range_tol) | (p > 1.0 + spec.range_tol)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise InversionError(f"inverted probability {p[k]:.6g} outside [0, 1] at x={x[k]:.6g}")
    out[pos] = np.clip(p, 0.0, 1.0)
    return out


def cf_invert_below(
    phi: Callable[[np.ndarray], np.ndarray], x: float, spec: CfInversionSpec = CfInversionSpec()
) -> float:
    """P[X < x] for a non-negative random variable with characteristic function ``phi``.

    Scalar front end of :func:`cf_invert_below_many`.
    """
    return float(cf_invert_below_many(phi, [float(x)], spec)[0])


def find_root_bracketed(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12) -> float:
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if flo * fhi > 0:
        raise BracketError(f"no sign change on [{lo}, {hi}]")
    return float(optimize.brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500))
