"""Property-based checks of the invariants that hold for any valid input."""

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from d2d_underlay.analytic import mode_boundary, overlap_probability
from d2d_underlay.config import SweepConfig, parse_text, resolve
from d2d_underlay.mcsim import wilson_interval
from d2d_underlay.netmodel import LOS, NLOS, NetworkParams, compute_sinr, cu_transmit_power, default_bs_profile
from d2d_underlay.numerics import cf_invert_below

BS = default_bs_profile()
dist = st.floats(1e-3, 20.0)
cond = st.sampled_from([LOS, NLOS])


@given(dist, cond)
def test_inverse_gain_round_trip(r, c):
    assert math.isclose(BS.inverse_gain(c, BS.gain(c, r)), r, rel_tol=1e-10)


@given(dist, dist, cond)
def test_gain_decreasing(r1, r2, c):
    if r1 < r2:
        assert BS.gain(c, r1) > BS.gain(c, r2)


@given(st.floats(0.05, 1.0), st.floats(1e-2, 1e2), dist, cond)
def test_power_control_reaches_target_fraction(eps, h, r, c):
    p = NetworkParams(epsilon=eps)
    g = h * BS.gain(c, r)
    rx = cu_transmit_power(p, BS, h, r, c) * g
    assert math.isclose(rx, p.p_0_mw * g ** (1 - eps), rel_tol=1e-9)


@given(st.floats(0, 1e3), st.floats(0, 1e3), st.floats(0, 1e3), st.floats(1e-6, 1e3))
def test_sinr_bounds(s, ic, id_, n):
    v = compute_sinr(s, ic, id_, n)
    assert 0 <= v <= s / n * (1 + 1e-12)


@given(st.floats(-100.0, -20.0), st.floats(0.5, 5.0))
@settings(max_examples=30, deadline=None)
def test_q_monotone_in_beta(beta, delta):
    p = NetworkParams(beta=beta)
    assert mode_boundary(p).q >= mode_boundary(p.with_(beta=beta + delta)).q


@given(st.floats(0.01, 2.0), st.floats(0.01, 3.0), st.floats(0.01, 2.0))
def test_overlap_is_probability(rd, r1, t):
    v = overlap_probability(rd, r1, t)
    assert 0.0 <= v <= 1.0


@given(st.floats(0.1, 10.0), st.floats(0.05, 5.0))
@settings(max_examples=25, deadline=None)
def test_cf_inversion_of_exponential(mean, x):
    p = cf_invert_below(lambda w: 1.0 / (1.0 - 1j * mean * np.asarray(w)), x)
    assert abs(p - (1 - math.exp(-x / mean))) <= 1e-4


@given(st.integers(0, 500), st.integers(1, 500))
def test_wilson_interval_ordered(k, n):
    k = min(k, n)
    lo, hi = wilson_interval(k, n)
    assert 0 <= lo <= k / n <= hi <= 1


@given(st.floats(1.0, 20.0), st.floats(0.05, 1.0), st.floats(-90.0, -30.0), st.integers(0, 2**31))
@settings(max_examples=30)
def test_config_echo_round_trip(lam_b, eps, beta, seed):
    cfg = SweepConfig(params=NetworkParams(lambda_b=lam_b, epsilon=eps, beta=beta), seed=seed)
    again = resolve(parse_text(cfg.echo()))
    assert again.params.lambda_b == lam_b and again.params.epsilon == eps and again.seed == seed
