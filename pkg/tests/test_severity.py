import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special, stats

from catbond.severity import (Exponential, LogNormal, Pareto, from_params, lambert_w, laplace,
                              laplace_oracle)

BASE_LN = LogNormal(6.387, 0.153)


class TestLambertW:
    def test_known_values(self):
        assert lambert_w(0.0) == 0.0
        assert lambert_w(math.e) == pytest.approx(1.0, rel=1e-15)
        assert lambert_w(1.0) == pytest.approx(0.5671432904097838, rel=1e-15)

    def test_matches_scipy(self):
        x = np.concatenate([np.geomspace(1e-12, 1e6, 200), [0.0]])
        np.testing.assert_allclose(lambert_w(x), special.lambertw(x).real, rtol=1e-14, atol=1e-300)

    def test_rejects_negative_and_nan(self):
        with pytest.raises(ValueError):
            lambert_w(-0.1)
        with pytest.raises(ValueError):
            lambert_w(np.array([1.0, np.nan]))

    def test_scalar_in_scalar_out(self):
        assert isinstance(lambert_w(2.0), float)
        assert lambert_w(np.array([1.0, 2.0])).shape == (2,)

    @given(st.floats(0.0, 1e8))
    def test_defining_identity(self, x):
        w = lambert_w(x)
        assert w * math.exp(w) == pytest.approx(x, rel=1e-13, abs=1e-300)


class TestExponential:
    def test_closed_forms(self):
        e = Exponential(2.0)
        assert e.cdf(1.0) == pytest.approx(1 - math.exp(-2))
        assert e.laplace(3.0) == 2.0 / 5.0
        assert e.mean() == 0.5 and e.second_moment() == 0.5

    def test_laplace_at_zero_is_one(self):
        assert Exponential(0.3).laplace(0.0) == 1.0

    def test_oracle_agrees(self):
        e = Exponential(1 / 3000)
        for u in (1e-6, 1e-4, 1e-2):
            assert e.laplace(u) == pytest.approx(e.laplace_oracle(u), rel=1e-9)

    @pytest.mark.parametrize("rate", [0.0, -1.0, math.inf, math.nan])
    def test_invalid_rate(self, rate):
        with pytest.raises(ValueError):
            Exponential(rate)


class TestLogNormal:
    def test_cdf_matches_scipy(self):
        x = np.linspace(100, 2000, 50)
        ref = stats.lognorm.cdf(x, s=BASE_LN.sigma, scale=math.exp(BASE_LN.mu))
        np.testing.assert_allclose(BASE_LN.cdf(x), ref, rtol=1e-12, atol=1e-15)

    def test_laplace_within_one_percent_on_operating_grid(self):
        for u in np.geomspace(1e-6, 1e-2, 25):
            assert BASE_LN.laplace(u) == pytest.approx(BASE_LN.laplace_oracle(u), rel=0.01)

    def test_oracle_against_moment_expansion(self):
        # small u: phi(u) ~ 1 - u m1 + u^2 m2 / 2
        u = 1e-7
        approx = 1 - u * BASE_LN.mean() + 0.5 * u * u * BASE_LN.second_moment()
        assert BASE_LN.laplace_oracle(u) == pytest.approx(approx, abs=1e-12)

    def test_laplace_vectorised(self):
        u = np.array([0.0, 1e-4, 1e-3])
        out = BASE_LN.laplace(u)
        assert out.shape == (3,) and out[0] == 1.0

    def test_negative_argument_rejected(self):
        with pytest.raises(ValueError):
            BASE_LN.laplace(-1e-3)
        with pytest.raises(ValueError):
            LogNormal(0.0, 0.0)

    @given(st.floats(-1.0, 8.0), st.floats(0.05, 0.4), st.floats(1e-6, 1.0))
    def test_approximation_tight_for_small_sigma(self, mu, sigma, scale):
        ln = LogNormal(mu, sigma)
        u = scale * math.exp(-mu)
        assert ln.laplace(u) == pytest.approx(ln.laplace_oracle(u), rel=0.01)


class TestPareto:
    def test_lomax_moments(self):
        p = Pareto(3.0, 2.0)
        assert p.mean() == pytest.approx(1.0)
        assert p.second_moment() == pytest.approx(4.0)
        assert Pareto(2.0, 1.0).second_moment() == math.inf

    def test_cdf_matches_scipy(self):
        x = np.linspace(0, 50, 30)
        np.testing.assert_allclose(Pareto(2.5, 4.0).cdf(x), stats.lomax.cdf(x, 2.5, scale=4.0), rtol=1e-12)

    def test_laplace_matches_oracle(self):
        p = Pareto(3.0, 2.0)
        for u in (1e-5, 1e-2, 0.5, 5.0, 100.0):
            assert p.laplace(u) == pytest.approx(p.laplace_oracle(u), abs=1e-9)

    def test_laplace_tolerance_halving(self):
        p = Pareto(2.5, 1.0)
        for u in (1e-3, 0.1, 1.0, 10.0):
            assert abs(p.laplace(u, 1e-10) - p.laplace(u, 5e-11)) <= 1e-8

    def test_sample_mean(self):
        p = Pareto(4.0, 3.0)
        x = p.sample(np.random.default_rng(1), 200_000)
        assert x.mean() == pytest.approx(p.mean(), rel=0.02)


@pytest.mark.parametrize("model", [Exponential(0.01), BASE_LN, Pareto(3.0, 200.0)])
class TestCommonInterface:
    def test_laplace_monotone_and_bounded(self, model):
        u = np.geomspace(1e-6, 1e-1, 12)
        phi = np.asarray(laplace(model, u))
        assert np.all(phi <= 1.0) and np.all(phi > 0.0)
        assert np.all(np.diff(phi) < 0)

    def test_cdf_nondecreasing(self, model):
        x = np.linspace(0, 5000, 101)
        assert np.all(np.diff(model.cdf(x)) >= 0)

    def test_samples_positive_and_deterministic(self, model):
        a = model.sample(np.random.default_rng(7), 100)
        b = model.sample(np.random.default_rng(7), 100)
        assert np.all(a > 0) and np.array_equal(a, b)

    def test_oracle_at_zero(self, model):
        assert laplace_oracle(model, 0.0) == pytest.approx(1.0, abs=1e-10)


def test_from_params():
    assert from_params("Exponential", rate=2.0) == Exponential(2.0)
    assert from_params("lognormal", mu=1.0, sigma=0.5) == LogNormal(1.0, 0.5)
    with pytest.raises(ValueError):
        from_params("weibull", k=1.0)
