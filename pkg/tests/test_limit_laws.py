import math

import numpy as np
import pytest
from scipy import integrate

from pssmp_limits.errors import ConfigError, DegenerateLawError, DomainError, UsageError
from pssmp_limits.limit_laws import (
    DynkinLamperti,
    GrowthDescriptor,
    IntegralTestClassifier,
    Verdict,
    growth_g,
    integral_test,
    lil_constant,
    limit_v_flag,
    ml_moment,
    ml_sampler,
    v_cdf,
    v_density,
    v_from_u,
    v_sampler,
)
from pssmp_limits.mc_stats import EmpiricalDistribution, ks_distance, moment_estimate


class TestVLaw:
    def test_density_value(self):
        assert v_density(1.0, 0.5, 2.0) == pytest.approx(1.0 / (4.0 * math.pi), rel=1e-12)

    @pytest.mark.parametrize("alpha,beta", [(1.0, 0.5), (0.5, 0.3), (2.0, 0.8)])
    def test_density_integrates_to_one(self, alpha, beta):
        head, _ = integrate.quad(lambda v: v_density(alpha, beta, v), 0.0, 1.0, limit=200)
        tail, _ = integrate.quad(lambda v: v_density(alpha, beta, v), 1.0, np.inf, limit=200)
        assert head + tail == pytest.approx(1.0, abs=1e-6)

    def test_density_blows_up_at_zero(self):
        assert v_density(1.0, 0.5, 1e-12) > v_density(1.0, 0.5, 1e-6) > v_density(1.0, 0.5, 1.0)

    def test_cdf_values(self):
        assert v_cdf(1.0, 0.5, 2.0) == pytest.approx(0.5, abs=1e-12)
        assert v_cdf(1.0, 0.5, 0.0) == 0.0
        assert v_cdf(1.0, 0.5, np.inf) == 1.0

    def test_cdf_is_integral_of_density(self):
        for v in np.linspace(0.1, 10.0, 20):
            area, _ = integrate.quad(lambda x: v_density(0.7, 0.4, x), 0.0, v, limit=200)
            assert v_cdf(0.7, 0.4, v) == pytest.approx(area, abs=1e-6)

    def test_sampler(self, rng):
        samples = v_sampler(1.0, 0.5, rng, 20_000)
        assert np.all(np.isfinite(samples)) and np.all(samples >= 0)
        ks = ks_distance(EmpiricalDistribution.from_samples(samples), lambda v: v_cdf(1.0, 0.5, v))
        assert ks <= 0.015
        assert np.median(samples) == pytest.approx(2.0, rel=0.1)

    @pytest.mark.parametrize("alpha,beta", [(1.0, 0.5), (0.5, 0.3), (2.0, 0.8)])
    def test_sampler_is_the_beta_transform(self, alpha, beta):
        """Each V is 2U / (alpha (1 - U)) of the Beta(1 - beta, beta) draw from the same stream."""
        u = np.random.default_rng(5).beta(1.0 - beta, beta, 1000)
        samples = v_sampler(alpha, beta, np.random.default_rng(5), 1000)
        np.testing.assert_array_equal(samples, 2.0 * u / (alpha * (1.0 - u)))

    def test_transform(self):
        assert v_from_u(0.5, 1.0) == pytest.approx(2.0)
        assert v_from_u(0.0, 2.0) == 0.0

    @pytest.mark.parametrize("beta,flag", [(0.0, "V=inf"), (1.0, "V=0")])
    def test_degenerate_index(self, beta, flag):
        with pytest.raises(DegenerateLawError) as info:
            v_cdf(1.0, beta, 1.0)
        assert info.value.flag == flag
        assert limit_v_flag(beta) == flag
        assert limit_v_flag(0.5) is None


class TestMittagLeffler:
    def test_moments(self):
        assert ml_moment(1.0, 5) == pytest.approx(1.0)
        assert ml_moment(0.0, 3) == pytest.approx(6.0)
        assert ml_moment(0.5, 1) == pytest.approx(2.0 / math.sqrt(math.pi), rel=1e-12)

    @pytest.mark.parametrize("beta", [0.3, 0.5, 0.8])
    def test_sampler_moments(self, beta, rng):
        samples = ml_sampler(beta, rng, 200_000)
        assert np.all(samples > 0) and np.all(np.isfinite(samples))
        for n in (1, 2, 3):
            assert moment_estimate(samples, n).within(ml_moment(beta, n), rel_tol=0.0)

    def test_boundary_indices(self, rng):
        np.testing.assert_array_equal(ml_sampler(1.0, rng, 5), np.ones(5))
        with pytest.raises(DegenerateLawError) as info:
            ml_sampler(0.0, rng, 5)
        assert info.value.flag == "exponential"
        with pytest.raises(DomainError):
            ml_moment(1.5, 1)


class TestDynkinLamperti:
    def test_density_value(self):
        assert DynkinLamperti(0.5).density(0.5, 0.5) == pytest.approx(1.0 / (math.pi * math.sqrt(2.0)), rel=1e-12)

    def test_marginal(self):
        law = DynkinLamperti(0.3)
        for u in (0.1, 0.5, 0.9):
            marginal, _ = integrate.quad(lambda w: law.density(u, w), 0.0, np.inf)
            assert marginal == pytest.approx(float(law.marginal_u_density(u)), rel=1e-8)

    def test_total_mass(self):
        law = DynkinLamperti(0.5)
        assert law.cell_probability(0.0, 1.0, 0.0, np.inf) == pytest.approx(1.0, abs=1e-6)
        inner = law.cell_probability(0.0, 0.5, 0.0, np.inf) + law.cell_probability(0.5, 1.0, 0.0, np.inf)
        assert inner == pytest.approx(1.0, abs=1e-6)

    def test_sample_marginal(self, rng):
        u, o = DynkinLamperti(0.5).sample(rng, 20_000)
        assert np.mean(u) == pytest.approx(0.5, abs=0.01)
        assert np.all(o >= 0)

    def test_index_range(self):
        with pytest.raises(DomainError):
            DynkinLamperti(1.0)


class TestEnvelopes:
    def test_lil_constant(self):
        assert lil_constant(0.5) == pytest.approx(0.25)
        with pytest.raises(DomainError):
            lil_constant(1.0)

    def test_growth_g_stable(self, stable_half):
        t = 1e6
        loglog = math.log(math.log(t))
        assert growth_g(stable_half, t) == pytest.approx(t * t / loglog, rel=1e-9)

    def test_growth_g_domain(self, stable_half):
        with pytest.raises(DomainError):
            growth_g(stable_half, math.exp(math.e))


class TestIntegralTest:
    def test_verdicts(self, stable_half):
        assert integral_test(stable_half, GrowthDescriptor(2.0), doublings=20).verdict == Verdict.CONVERGES
        assert integral_test(stable_half, GrowthDescriptor(0.5), doublings=20).verdict == Verdict.DIVERGES

    def test_stable_under_doubling(self, stable_half):
        for exponent in (2.0, 0.5):
            short = integral_test(stable_half, GrowthDescriptor(exponent), doublings=20)
            long = integral_test(stable_half, GrowthDescriptor(exponent), doublings=40)
            assert short.verdict == long.verdict

    def test_critical_function_is_inconclusive(self, stable_half):
        result = integral_test(stable_half, GrowthDescriptor(1.0), doublings=20)
        assert result.verdict == Verdict.INCONCLUSIVE
        assert result.partial_integrals[-1] > result.partial_integrals[0]

    def test_callable_function(self, stable_half):
        result = IntegralTestClassifier(doublings=20).classify(stable_half, lambda x: np.power(x, 2.0))
        assert result.verdict == Verdict.CONVERGES
        assert result.positive_increase == pytest.approx(0.25)

    def test_descriptor(self):
        descriptor = GrowthDescriptor.from_document({"exponent": 1.0, "log_power": 2.0})
        assert descriptor.label == "t^1 (log t)^2"
        assert descriptor(math.e) == pytest.approx(math.e)
        with pytest.raises(ConfigError):
            GrowthDescriptor.from_document({"exponent": 1.0, "power": 2.0})
        with pytest.raises(UsageError):
            GrowthDescriptor(0.0)
