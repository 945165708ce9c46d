import math

import numpy as np
import pytest

from d2d_underlay.analytic import (
    AnalyticModel,
    AnalyticOptions,
    CoverageQuery,
    ExponentCurve,
    ase_tier,
    gauss_legendre,
    mode_boundary,
    overlap_probability,
)
from d2d_underlay.equivmap import closed_form_measure
from d2d_underlay.netmodel import CONDITIONS, LOS, NLOS, NetworkParams, db_to_lin

from oracles import ASE_EXP_ORACLE

BASE = NetworkParams(beta=-50.0)


@pytest.fixture(scope="module")
def model():
    return AnalyticModel(BASE)


@pytest.fixture(scope="module")
def noise_only():
    opt = AnalyticOptions(cu_interference_scale=0.0, d2d_interference_scale=0.0)
    return AnalyticModel(BASE, opt)


class TestModeBoundary:
    @pytest.mark.parametrize("beta", [-70.0, -55.0, -40.0])
    def test_against_closed_form_measure(self, beta):
        p = BASE.with_(beta=beta)
        mb = mode_boundary(p)
        lam = sum(closed_form_measure(p.bs_profile, p.sigma_shadow_bs, c, mb.t(c)) for c in CONDITIONS)
        # closed form vs Gauss-Hermite table: agreement limited by the LoS kink
        assert mb.q == pytest.approx(-math.expm1(-p.lambda_b * float(lam)), abs=2e-3)

    def test_thresholds_hit_beta(self):
        mb = mode_boundary(BASE)
        for c in CONDITIONS:
            assert BASE.p_b_mw * BASE.bs_profile.gain(c, mb.t(c)) == pytest.approx(BASE.beta_mw, rel=1e-9)

    def test_limits(self):
        assert mode_boundary(BASE.with_(beta=-150.0)).q == pytest.approx(1.0)
        # lognormal shadowing keeps a small tail even at very high thresholds
        assert mode_boundary(BASE.with_(beta=10.0)).q < 1e-3
        assert mode_boundary(BASE.with_(beta=30.0)).q < mode_boundary(BASE.with_(beta=10.0)).q

    def test_denser_bs_raises_q(self):
        assert mode_boundary(BASE.with_(lambda_b=10.0)).q > mode_boundary(BASE).q


class TestServingLaws:
    def test_cu_law_normalised(self, model):
        assert sum(model.cu_law[c].total for c in CONDITIONS) == pytest.approx(1.0, abs=2e-3)

    def test_cu_pdf_rejects_distance_beyond_boundary(self, model):
        with pytest.raises(ValueError):
            model.cu_serving_distance_pdf(LOS, 2 * model.boundary.t(LOS))

    def test_d2d_law_normalised(self, model):
        assert sum(model.d2d_law[c].total for c in CONDITIONS) == pytest.approx(1.0, abs=5e-3)

    def test_d2d_cdf_monotone(self, model):
        r = np.geomspace(1e-3, 2.0, 12)
        for c in CONDITIONS:
            v = [model.d2d_serving_distance_cdf(c, float(x)) for x in r]
            assert np.all(np.diff(v) >= -1e-9)

    def test_d2d_pdf_closed_form_matches_difference(self, model):
        for c, R in ((NLOS, 0.2), (NLOS, 0.5), (LOS, 0.05)):
            assert model.d2d_serving_distance_pdf_exact(c, R) == pytest.approx(
                model.d2d_serving_distance_pdf(c, R), rel=2e-2, abs=1e-4
            )

    def test_overlap_probability(self):
        # BS at distance 1 with radius t = 1: the unit circle around the receiver
        # is covered on an arc of 2 pi / 3, i.e. a third of its length
        assert overlap_probability(1.0, 1.0, 1.0) == pytest.approx(1 / 3)
        assert overlap_probability(0.1, 5.0, 1.0) == 0.0
        assert overlap_probability(0.1, 0.5, 1.0) == 1.0


class TestCharacteristicFunctions:
    def test_cellular_cf_normalised_and_hermitian(self, model):
        r = float(model.cu_law[NLOS].r[3])
        w = np.array([0.0, 0.5, 5.0, 50.0])
        phi = model.cf_inv_sinr_cellular(NLOS, w, r)
        assert phi[0] == pytest.approx(1.0)
        assert np.all(np.abs(phi) <= 1 + 1e-9)
        np.testing.assert_allclose(model.cf_inv_sinr_cellular(NLOS, -w, r), np.conj(phi), atol=1e-12)

    def test_d2d_cf_normalised_and_hermitian(self, model):
        w = np.array([0.0, 0.5, 5.0])
        phi = model.cf_inv_sinr_d2d(NLOS, w, 0.2)
        assert phi[0] == pytest.approx(1.0)
        np.testing.assert_allclose(model.cf_inv_sinr_d2d(NLOS, -w, 0.2), np.conj(phi), atol=1e-12)

    def test_exponent_curve_reproduces_function(self):
        fn = lambda s: 3.0 * s**0.6 + 0.5j * s**0.6
        curve = ExponentCurve(fn, 40, growth=0.6)
        s = np.array([1e-8, 1e-3, 1.0, 1e3])
        np.testing.assert_allclose(curve(s), fn(s), rtol=1e-5)
        assert curve(0.0) == 0.0


class TestCoverage:
    def test_noise_only_matches_signal_law(self, noise_only):
        gam = db_to_lin(np.array([-10.0, 0.0, 10.0, 30.0]))
        want = np.zeros_like(gam)
        for c, law in noise_only.cu_law.items():
            snr = noise_only.cellular_signal(c, law.r) / BASE.noise_bs_mw
            want += np.array([law.mass[snr > g].sum() for g in gam])
        np.testing.assert_allclose(noise_only.coverage_cellular(gam), want, atol=2e-3)

    def test_cellular_values(self, model):
        cov = model.coverage_cellular(db_to_lin(np.array([-10.0, 0.0, 10.0])))
        assert np.all(np.diff(cov) < 0)
        assert cov[0] > 0.95 and cov[2] < 0.2

    def test_d2d_monotone_and_bounded(self, model):
        cov = model.coverage_d2d(db_to_lin(np.array([-10.0, 0.0, 10.0, 20.0])))
        assert np.all(np.diff(cov) <= 1e-9)
        assert np.all((cov >= 0) & (cov <= 1))

    def test_interference_lowers_coverage(self, model, noise_only):
        g = db_to_lin(5.0)
        assert model.coverage_cellular(g) < noise_only.coverage_cellular(g)

    def test_query_dispatch(self, model):
        q = CoverageQuery(1.0, "cellular", BASE)
        assert model.coverage(q) == pytest.approx(model.coverage_cellular(1.0))
        with pytest.raises(ValueError):
            CoverageQuery(0.0, "cellular", BASE)
        with pytest.raises(ValueError):
            CoverageQuery(1.0, "uplink", BASE)


class TestAse:
    def test_exponential_oracle(self):
        assert ase_tier(1.0, 1.0, lambda x: np.exp(-x)) == pytest.approx(ASE_EXP_ORACLE, rel=1e-3)

    def test_density_scaling(self):
        assert ase_tier(4.0, 1.0, lambda x: np.exp(-x)) == pytest.approx(4 * ase_tier(1.0, 1.0, lambda x: np.exp(-x)))

    def test_total_is_sum_of_tiers(self, model):
        total, cell, d2d = model.ase_total(1.0)
        assert total == cell + d2d
        assert cell > 0 and d2d > 0


def test_gauss_legendre_integrates_piecewise_polynomial():
    x, w = gauss_legendre([0.0, 0.3, 1.0], 4, 2)
    assert np.sum(w * x**5) == pytest.approx(1 / 6, rel=1e-12)


def test_options_validation():
    with pytest.raises(ValueError):
        AnalyticOptions(cu_exclusion="none")
    with pytest.raises(ValueError):
        AnalyticOptions(pc_form="other")
