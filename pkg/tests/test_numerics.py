import math

import numpy as np
import pytest

from d2d_underlay.numerics import (
    BracketError,
    CfInversionSpec,
    InversionError,
    NonConvergenceError,
    QuadratureSpec,
    cf_invert_below,
    cf_invert_below_many,
    find_root_bracketed,
    integrate_adaptive,
)

from oracles import EXP_CDF_AT_1


def exp_cf(w):
    return 1.0 / (1.0 - 1j * np.asarray(w))


def test_integrate_finite():
    assert integrate_adaptive(np.sin, 0.0, math.pi).value == pytest.approx(2.0, rel=1e-10)


def test_integrate_semi_infinite():
    assert integrate_adaptive(lambda x: math.exp(-x), 0.0, math.inf).value == pytest.approx(1.0, rel=1e-10)


def test_integrate_oscillatory_tail():
    # Dirichlet integral: QUADPACK alone gives up, the panel sums plus Wynn acceleration do not
    f = lambda x: math.sin(x) / x if x else 1.0
    res = integrate_adaptive(f, 0.0, math.inf, QuadratureSpec(rel_tol=1e-7, abs_tol=1e-8, max_subdivisions=400))
    assert res.value == pytest.approx(math.pi / 2, abs=1e-6)


def test_integrate_reports_non_convergence():
    with pytest.raises(NonConvergenceError) as info:
        integrate_adaptive(lambda x: math.sin(1 / x) / x, 1e-8, 1.0, QuadratureSpec(max_subdivisions=3))
    assert math.isfinite(info.value.best_estimate)


def test_integrate_bad_interval():
    with pytest.raises(ValueError):
        integrate_adaptive(np.sin, 1.0, 0.0)


class TestCfInversion:
    def test_exponential(self):
        assert cf_invert_below(exp_cf, 1.0) == pytest.approx(EXP_CDF_AT_1, abs=1e-5)

    def test_many_thresholds_share_a_pass(self):
        x = np.array([0.01, 0.1, 1.0, 3.0])
        np.testing.assert_allclose(cf_invert_below_many(exp_cf, x), 1 - np.exp(-x), atol=1e-5)

    def test_scaled_exponential_far_above_threshold(self):
        # mean 1e4 but threshold 1: the CF turns over within one default panel
        scale = 1e4
        p = cf_invert_below(lambda w: exp_cf(scale * np.asarray(w)), 1.0)
        assert p == pytest.approx(1 - math.exp(-1 / scale), abs=1e-5)

    def test_gamma_variable(self):
        from scipy.stats import gamma

        cf = lambda w: (1 - 2j * np.asarray(w)) ** -3.0
        assert cf_invert_below(cf, 5.0) == pytest.approx(gamma(3, scale=2).cdf(5.0), abs=1e-5)

    def test_non_positive_threshold(self):
        assert cf_invert_below(exp_cf, 0.0) == 0.0
        assert cf_invert_below(exp_cf, -1.0) == 0.0

    def test_non_finite_cf(self):
        with pytest.raises(InversionError):
            cf_invert_below(lambda w: np.full(np.shape(w), np.nan, dtype=complex), 1.0)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            CfInversionSpec(omega_max=0.0)
        with pytest.raises(ValueError):
            CfInversionSpec(panel_count=0)


def test_root_bracketed():
    assert find_root_bracketed(lambda x: x**3 - 2, 0.0, 2.0) == pytest.approx(2 ** (1 / 3), rel=1e-12)


def test_root_without_sign_change():
    with pytest.raises(BracketError):
        find_root_bracketed(lambda x: x**2 + 1, -1.0, 1.0)
