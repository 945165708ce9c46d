import math

import numpy as np
import pytest

from d2d_underlay.netmodel import (
    LOS,
    NLOS,
    NetworkParams,
    PathLossProfile,
    Segment,
    SingularityError,
    compute_sinr,
    cu_transmit_power,
    default_bs_profile,
    default_ue_profile,
    los_probability,
    path_gain,
    received_power_dl,
)

BS = default_bs_profile()
UE = default_ue_profile()
REF = BS.ref_distance


class TestLosProbability:
    def test_linear_midpoint(self):
        assert los_probability(BS, 0.15) == pytest.approx(0.5)

    def test_cutoff_boundary(self):
        assert los_probability(BS, 0.3) == 0.0
        assert los_probability(BS, 1.0) == 0.0

    def test_zero_distance(self):
        assert los_probability(UE, 0.0) == 1.0

    def test_negative_distance_rejected(self):
        with pytest.raises(ValueError):
            los_probability(BS, -0.1)


class TestPathGain:
    def test_reference_gains(self):
        assert path_gain(BS, LOS, REF) == pytest.approx(10**-3.08)
        assert path_gain(UE, NLOS, REF) == pytest.approx(10**-5.578)

    def test_doubling(self):
        assert path_gain(BS, LOS, 0.4) / path_gain(BS, LOS, 0.2) == pytest.approx(2**-2.42)

    def test_singularity(self):
        with pytest.raises(SingularityError):
            path_gain(BS, LOS, 0.0)

    def test_piecewise_segment_selection(self):
        prof = PathLossProfile(
            (Segment(0.1, 1e-3, 2.0, 1e-4, 3.0), Segment(math.inf, 1e-3 * 100**-2 * 100**3, 3.0, 1e-4 * 100**-3 * 100**4, 4.0)),
            los_cutoff=0.2,
        )
        # continuous at the break and decreasing on each side
        assert prof.gain(LOS, 0.1) == pytest.approx(prof.gain(LOS, 0.1 + 1e-12), rel=1e-9)
        assert prof.gain(LOS, 0.2) / prof.gain(LOS, 0.4) == pytest.approx(2**3)
        assert prof.inverse_gain(NLOS, prof.gain(NLOS, 0.37)) == pytest.approx(0.37)


class TestPowers:
    def test_received_power(self):
        p = NetworkParams()
        assert received_power_dl(p, BS, 1.0, REF, LOS) == pytest.approx(10**4.6 * 10**-3.08)

    def test_received_power_linear_in_shadow(self):
        p = NetworkParams()
        a = received_power_dl(p, BS, 1.0, 0.2, NLOS)
        assert received_power_dl(p, BS, 0.5, 0.2, NLOS) == pytest.approx(0.5 * a, rel=1e-15)

    def test_equivalent_distance_identity(self):
        p = NetworkParams()
        h, r, alpha = 3.7, 0.25, BS.exponent(NLOS)
        r_eq = h ** (-1 / alpha) * r
        assert received_power_dl(p, BS, h, r, NLOS) == pytest.approx(p.p_b_mw * path_gain(BS, NLOS, r_eq), rel=1e-12)

    def test_full_inversion_reaches_target(self):
        p = NetworkParams(epsilon=1.0)
        for h, r, c in [(0.3, 0.05, LOS), (4.0, 0.7, NLOS)]:
            pt = cu_transmit_power(p, BS, h, r, c)
            assert pt * h * path_gain(BS, c, r) == pytest.approx(p.p_0_mw, rel=1e-12)

    def test_fractional_inversion(self):
        p = NetworkParams(epsilon=0.8)
        r = BS.inverse_gain(NLOS, 1e-6)
        rx = cu_transmit_power(p, BS, 1.0, r, NLOS) * 1e-6
        assert rx == pytest.approx(p.p_0_mw * 10**-1.2, rel=1e-9)

    def test_unit_distance_case(self):
        p = NetworkParams()
        assert cu_transmit_power(p, BS, 1.0, REF, LOS) == pytest.approx(p.p_0_mw * (10**-3.08) ** -0.8)

    def test_power_cap(self):
        p = NetworkParams(cu_power_cap=23.0)
        assert cu_transmit_power(p, BS, 1.0, 2.0, NLOS) == pytest.approx(10**2.3)


class TestSinr:
    def test_examples(self):
        assert compute_sinr(1, 0, 0, 1) == 1
        assert compute_sinr(10, 5, 4, 1) == pytest.approx(1.0)
        assert compute_sinr(0, 1, 1, 1) == 0

    def test_zero_noise_rejected(self):
        with pytest.raises(ValueError):
            compute_sinr(1, 0, 0, 0)


class TestParams:
    def test_defaults(self):
        p = NetworkParams()
        assert (p.lambda_b, p.lambda_u, p.p_b, p.epsilon, p.rho) == (5.0, 200.0, 46.0, 0.8, 0.1)
        assert p.noise_bs == -114.0 and p.noise_ue == -95.0

    @pytest.mark.parametrize(
        "kw", [dict(epsilon=1.5), dict(epsilon=0.0), dict(rho=-0.1), dict(lambda_b=0.0), dict(lambda_u=1.0), dict(beta=math.inf)]
    )
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            NetworkParams(**kw)

    def test_profile_validation(self):
        with pytest.raises(ValueError):
            PathLossProfile((Segment(1.0, 1e-3, 2, 1e-4, 3),), los_cutoff=0.1)  # last break must be inf
        with pytest.raises(ValueError):
            PathLossProfile.single(-1.0, 2, 1e-4, 3, 0.1)

    def test_d2d_fraction(self):
        assert NetworkParams(rho=0.2).d2d_tx_fraction == pytest.approx(0.1)
        assert np.isclose(NetworkParams().p_d_mw, 10.0)
