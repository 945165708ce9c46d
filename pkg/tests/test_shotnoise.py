import warnings

import numpy as np
import pytest
from scipy import integrate

from d2d_underlay.netmodel import LOS, NLOS, default_bs_profile, default_ue_profile
from d2d_underlay.shotnoise import _filon_weights, unit_intensity_table, unit_shot_table

BS = default_bs_profile()
UE = default_ue_profile()


def direct_exponent(table, profile, cond, a, lower, upper=50.0):
    """int_lower^upper (1 - e^{i a g(v)}) lambda(v) dv by adaptive quadrature in ln v."""

    def part(fn):
        f = lambda u: fn(1j * a * profile.gain(cond, np.exp(u))) * table.density(cond, np.exp(u)) * np.exp(u)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            return integrate.quad(f, np.log(lower), np.log(upper), limit=400, epsabs=1e-12, epsrel=1e-9)[0]

    re = part(lambda z: (1 - np.exp(z)).real)
    im = part(lambda z: (1 - np.exp(z)).imag)
    return re + 1j * im


@pytest.mark.parametrize("profile, sigma, cond", [(BS, 8.0, NLOS), (BS, 8.0, LOS), (UE, 4.0, NLOS)])
@pytest.mark.parametrize("scale", [1e-2, 1.0, 1e2])
def test_table_matches_direct_quadrature(profile, sigma, cond, scale):
    unit = unit_intensity_table(profile, sigma)
    shot = unit_shot_table(profile, sigma, cond)
    lower = 0.05
    a = scale / float(profile.gain(cond, lower))
    want = direct_exponent(unit, profile, cond, a, lower)
    got = shot(a, lower)
    # the tabulated LoS density is the limiting factor: a few parts per thousand
    assert abs(got - want) <= 3e-3 * max(abs(want), 1e-6)


def test_exponent_vanishes_at_zero_frequency_and_beyond_grid():
    shot = unit_shot_table(BS, 8.0, NLOS)
    assert abs(shot(1e-30, 0.1)) < 1e-15
    assert shot(1e6, 100.0) == 0.0


def test_real_part_non_negative():
    shot = unit_shot_table(BS, 8.0, NLOS)
    a = np.geomspace(1e-3, 1e12, 60)
    assert np.all(shot(a, 0.02).real >= -1e-12)


def test_filon_weights_small_and_large_angle_agree():
    for th in (1e-2 * (1 - 1e-9), 1e-2 * (1 + 1e-9)):
        f0, f1 = _filon_weights(np.array([th]))
        assert f0[0] == pytest.approx((np.exp(1j * th) - 1) / (1j * th), rel=1e-9)
        assert f1[0] == pytest.approx(np.exp(1j * th) / (1j * th) + (np.exp(1j * th) - 1) / th**2, rel=1e-7)
