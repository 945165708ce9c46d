import math

import numpy as np
import pytest

from d2d_underlay.equivmap import (
    IntensityTable,
    TierSpec,
    closed_form_measure,
    crossover_distance,
    equivalent_distance,
    intensity_density,
    intensity_measure,
    lognormal_expectation,
    shadow_nodes,
)
from d2d_underlay.netmodel import LOS, NLOS, PathLossProfile, default_bs_profile

from oracles import (
    CROSSOVER_SQRT,
    FULL_LOS_MEASURE,
    LOGNORMAL_MEAN_8DB,
    LOS_DENSITY_NO_SHADOW,
    LOS_MEASURE_NO_SHADOW,
)

BS = default_bs_profile()


def test_lognormal_mean():
    assert lognormal_expectation(lambda h: h, 8.0) == pytest.approx(LOGNORMAL_MEAN_8DB, rel=1e-6)


def test_lognormal_weights_normalised():
    h, w = shadow_nodes(6.0)
    assert w.sum() == pytest.approx(1.0)
    assert np.all(h > 0)


def test_zero_sigma_is_a_point_mass():
    assert lognormal_expectation(lambda h: h**3, 0.0) == pytest.approx(1.0)


def test_non_finite_integrand_reports_node():
    with pytest.raises(FloatingPointError, match="shadow node"):
        lognormal_expectation(lambda h: np.where(h > 10, np.inf, h), 8.0)


def test_measure_without_shadowing():
    tier = TierSpec(5.0, BS, 0.0)
    assert intensity_measure(tier, LOS, 0.2) == pytest.approx(LOS_MEASURE_NO_SHADOW, rel=1e-10)
    assert intensity_density(tier, LOS, 0.2) == pytest.approx(LOS_DENSITY_NO_SHADOW, rel=1e-10)


def test_measure_with_full_los():
    prof = PathLossProfile.single(10**-3.08, 2.42, 10**-3.28, 3.0, math.inf)
    tier = TierSpec(5.0, prof, 8.0)
    assert intensity_measure(tier, LOS, 0.2) == pytest.approx(FULL_LOS_MEASURE, rel=1e-6)
    assert intensity_measure(tier, NLOS, 0.2) == pytest.approx(0.0, abs=1e-12)


# The LoS indicator puts a kink in the shadowing integrand where rho crosses the
# cutoff, which limits a 32-node Gauss-Hermite rule to a few parts per thousand.
@pytest.mark.parametrize("cond, rtol", [(LOS, 3e-3), (NLOS, 3e-4)])
def test_quadrature_matches_closed_form(cond, rtol):
    t = np.geomspace(1e-3, 5.0, 25)
    tier = TierSpec(1.0, BS, 8.0)
    np.testing.assert_allclose(intensity_measure(tier, cond, t), closed_form_measure(BS, 8.0, cond, t), rtol=rtol)


def test_density_is_derivative_of_measure():
    tier = TierSpec(5.0, BS, 8.0)
    t = np.array([0.05, 0.2, 0.8])
    h = 1e-6
    for cond in (LOS, NLOS):
        fd = (intensity_measure(tier, cond, t + h) - intensity_measure(tier, cond, t - h)) / (2 * h)
        np.testing.assert_allclose(intensity_density(tier, cond, t), fd, rtol=1e-5)


def test_density_scale_thins_tier():
    full = TierSpec(200.0, BS, 8.0)
    thin = TierSpec(200.0, BS, 8.0, density_scale=0.25)
    assert intensity_measure(thin, NLOS, 0.3) == pytest.approx(0.25 * intensity_measure(full, NLOS, 0.3))


def test_measure_at_zero_and_invalid():
    tier = TierSpec(5.0, BS, 8.0)
    assert intensity_measure(tier, LOS, 0.0) == 0.0
    with pytest.raises(ValueError):
        intensity_measure(tier, LOS, -1.0)
    with pytest.raises(ValueError):
        intensity_density(tier, LOS, 0.0)
    with pytest.raises(ValueError):
        TierSpec(0.0, BS, 8.0)


def test_equivalent_distance():
    assert equivalent_distance(1.0, 2.0**4, 4.0) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        equivalent_distance(0.0, 1.0, 2.0)


def test_crossover_oracle():
    prof = PathLossProfile.single(1.0, 2.0, 1.0, 4.0, 0.5, ref_distance=1.0)
    assert crossover_distance(prof, 0.1, LOS) == pytest.approx(CROSSOVER_SQRT, rel=1e-12)


def test_crossover_round_trip():
    r = np.array([0.01, 0.1, 1.0])
    back = crossover_distance(BS, crossover_distance(BS, r, LOS), NLOS)
    np.testing.assert_allclose(back, r, rtol=1e-12)


class TestIntensityTable:
    table = IntensityTable.for_tier(TierSpec(5.0, BS, 8.0))

    def test_lookup_matches_direct(self):
        t = np.array([0.003, 0.07, 0.4, 3.0])
        tier = TierSpec(5.0, BS, 8.0)
        for cond in (LOS, NLOS):
            np.testing.assert_allclose(self.table.measure(cond, t), intensity_measure(tier, cond, t), rtol=1e-6)

    def test_outside_grid_falls_back(self):
        tier = TierSpec(5.0, BS, 8.0)
        assert self.table.measure(NLOS, 80.0) == pytest.approx(intensity_measure(tier, NLOS, 80.0), rel=1e-12)

    def test_void_probability(self):
        v = self.table.void_probability(np.array([1e-3, 0.1, 1.0, 10.0]))
        assert np.all(np.diff(v) < 0)
        assert v[0] == pytest.approx(1.0, abs=1e-4)
        assert v[-1] < 1e-6
