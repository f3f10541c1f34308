import math

import numpy as np
import pytest

from cgclutter import (
    MixingLaw,
    continuous_mixing,
    make_builtin_finite,
    make_builtin_infinite,
    mean_k,
    pgf_k,
    pmf_k,
    sample_k,
    second_moment_k,
)
from cgclutter.bernstein import LimitTransform, from_lst
from cgclutter.mixing import pmf_from_derivatives


class TestClosedForms:
    def test_geometric_pmf(self):
        # h = z/(z+1) at kappa: success parameter p = 1/(kappa+1)
        law = MixingLaw(make_builtin_finite(), 9.0)
        p = 0.1
        for n in range(1, 51):
            assert pmf_k(law, n) == pytest.approx(p * (1 - p) ** (n - 1), rel=1e-12)

    def test_logarithmic_pmf(self):
        # h = ln(1+z) at kappa: parameter p = kappa/(1+kappa)
        law = MixingLaw(make_builtin_infinite(), 1.0)
        p = 0.5
        for n in range(1, 51):
            want = -(p ** n) / (n * math.log1p(-p))
            assert pmf_k(law, n) == pytest.approx(want, rel=1e-12)

    def test_pmf_at_zero_is_zero(self):
        law = MixingLaw(make_builtin_finite(), 9.0)
        assert pmf_k(law, 0) == 0.0

    def test_derivative_route_matches_closed_forms(self):
        for model, kappa in ((make_builtin_finite(), 9.0), (make_builtin_infinite(), 1.0)):
            law = MixingLaw(model, kappa)
            for n in range(1, 51):
                assert pmf_from_derivatives(model, kappa, n) == pytest.approx(
                    pmf_k(law, n), rel=1e-12, abs=1e-300
                )

    def test_derivative_route_high_order_log_domain(self):
        # n > 170 exercises the log-gamma branch
        model = make_builtin_finite()
        kappa = 200.0
        p = 1.0 / (kappa + 1.0)
        got = pmf_from_derivatives(model, kappa, 200)
        want = p * (1 - p) ** 199
        assert got == pytest.approx(want, rel=1e-10)


class TestPgfAndMoments:
    @pytest.mark.parametrize("model,kappa", [
        (make_builtin_finite(), 9.0),
        (make_builtin_infinite(), 150.0),
    ])
    def test_pgf_equals_pmf_sum(self, model, kappa):
        law = MixingLaw(model, kappa)
        ns = np.arange(1.0, len(law.pmf_table) + 1.0)
        for u in (0.25, 0.5, 0.9):
            by_sum = float(np.dot(law.pmf_table, u ** ns))
            assert by_sum == pytest.approx(pgf_k(law, u), abs=1e-8)

    def test_pgf_at_one(self):
        law = MixingLaw(make_builtin_finite(), 9.0)
        assert pgf_k(law, 1.0) == pytest.approx(1.0, abs=1e-15)

    def test_pgf_rejects_out_of_range(self):
        law = MixingLaw(make_builtin_finite(), 9.0)
        for u in (0.0, -0.1, 1.1):
            with pytest.raises(ValueError):
                pgf_k(law, u)

    def test_mean_formula(self):
        # E[K] = kappa h1 / h(kappa): geometric mean is kappa + 1
        law = MixingLaw(make_builtin_finite(), 9.0)
        assert mean_k(law) == pytest.approx(10.0, rel=1e-14)
        law = MixingLaw(make_builtin_infinite(), 150.0)
        assert mean_k(law) == pytest.approx(150.0 / math.log(151.0), rel=1e-14)

    def test_mean_matches_pmf_sum(self):
        for model, kappa in ((make_builtin_finite(), 9.0), (make_builtin_infinite(), 150.0)):
            law = MixingLaw(model, kappa)
            ns = np.arange(1.0, len(law.pmf_table) + 1.0)
            assert float(np.dot(law.pmf_table, ns)) == pytest.approx(
                mean_k(law), rel=1e-6
            )

    def test_second_moment_geometric(self):
        # brute-force sum for kappa=1 (p=1/2) gives E[K^2] = (2-p)/p^2 = 6
        law = MixingLaw(make_builtin_finite(), 1.0)
        assert second_moment_k(law) == pytest.approx(6.0, rel=1e-12)

    def test_second_moment_logarithmic(self):
        # brute-force sum for kappa=1 (p=1/2) gives 2/ln 2
        law = MixingLaw(make_builtin_infinite(), 1.0)
        assert second_moment_k(law) == pytest.approx(2.0 / math.log(2.0), rel=1e-12)

    def test_second_moment_matches_pmf_sum(self):
        law = MixingLaw(make_builtin_infinite(), 20.0)
        ns = np.arange(1.0, len(law.pmf_table) + 1.0)
        assert float(np.dot(law.pmf_table, ns ** 2)) == pytest.approx(
            second_moment_k(law), rel=1e-6
        )


class TestSampling:
    def test_geometric_sampler_moments(self):
        law = MixingLaw(make_builtin_finite(), 9.0)
        rng = np.random.default_rng(11)
        k = sample_k(law, rng, size=200_000)
        assert k.min() >= 1
        assert k.mean() == pytest.approx(mean_k(law), rel=0.02)
        assert np.mean(k.astype(float) ** 2) == pytest.approx(second_moment_k(law), rel=0.05)

    def test_logarithmic_sampler_pmf(self):
        law = MixingLaw(make_builtin_infinite(), 1.0)
        rng = np.random.default_rng(5)
        k = sample_k(law, rng, size=500_000)
        counts = np.bincount(k)
        tv = 0.0
        for n in range(1, len(counts)):
            tv += abs(counts[n] / len(k) - pmf_k(law, n))
        assert 0.5 * tv < 0.005

    def test_generic_inversion_sampler(self):
        # strip the family tag so sampling falls back to CDF inversion
        model = make_builtin_finite()
        model.family = None
        law = MixingLaw(model, 9.0)
        rng = np.random.default_rng(3)
        k = sample_k(law, rng, size=200_000)
        assert k.min() >= 1
        assert k.mean() == pytest.approx(10.0, rel=0.02)


class TestContinuousMixing:
    def test_rational_is_unit_exponential(self):
        mix = continuous_mixing(make_builtin_finite())
        s = np.array([0.0, 0.5, 1.0, 3.0])
        np.testing.assert_allclose(mix.cdf(s), 1.0 - np.exp(-s), rtol=1e-12)
        rng = np.random.default_rng(2)
        x = mix.sample(rng, size=200_000)
        assert x.mean() == pytest.approx(1.0, rel=0.01)
        assert x.var() == pytest.approx(1.0, rel=0.02)

    def test_rejects_infinite_activity(self):
        with pytest.raises(ValueError, match="finite-activity"):
            continuous_mixing(make_builtin_infinite())

    def test_generic_inversion_matches_exponential(self):
        # same rational model rebuilt without its family tag: the transform
        # inversion must reproduce the unit exponential CDF
        nu = 2.0
        model = from_lst(LimitTransform(make_builtin_finite(), nu), nu)
        mix = continuous_mixing(model)
        s = np.linspace(0.05, 6.0, 60)
        np.testing.assert_allclose(mix.cdf(s), 1.0 - np.exp(-s), atol=5e-3)
        rng = np.random.default_rng(8)
        x = mix.sample(rng, size=100_000)
        assert x.mean() == pytest.approx(1.0, rel=0.03)


class TestValidation:
    def test_rejects_nonpositive_kappa(self):
        with pytest.raises(ValueError):
            MixingLaw(make_builtin_finite(), 0.0)

    def test_pmf_rejects_negative_n(self):
        law = MixingLaw(make_builtin_finite(), 9.0)
        with pytest.raises(ValueError):
            pmf_k(law, -1)
