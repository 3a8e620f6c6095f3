import math

import numpy as np
import pytest
from scipy import special

from pssmp_limits.errors import DomainError, PreconditionError, UsageError
from pssmp_limits.exp_functional import (
    ExpFunctionalSampler,
    TailTarget,
    entrance_negative_moment,
    harmonic_tail_statistic,
    i_moment,
    left_tail_asymptotic,
    mu_functional,
    r_phi_moment,
    sample_I,
)
from pssmp_limits.mc_stats import moment_estimate
from pssmp_limits.subordinator_models import JumpLaw, SubordinatorSpec


@pytest.mark.parametrize(
    "spec",
    [
        SubordinatorSpec.stable(0.5),
        SubordinatorSpec.gamma(1.0, 1.0),
        SubordinatorSpec.compound_poisson(1.0, JumpLaw.point_mass(math.log(2.0))),
    ],
)
def test_factorization_identity(spec):
    for n in range(1, 11):
        product = r_phi_moment(spec, 1.0, n) * i_moment(spec, 1.0, n)
        assert product == pytest.approx(math.factorial(n), rel=1e-12)


def test_moment_formulas(cp_log2, stable_half):
    assert i_moment(cp_log2, 1.0, 1) == pytest.approx(2.0)
    assert i_moment(stable_half, 1.0, 2) == pytest.approx(math.sqrt(2.0))
    assert r_phi_moment(stable_half, 2.0, 0) == 1.0
    with pytest.raises(DomainError):
        r_phi_moment(stable_half, 1.0, -1)


def test_drift_only_is_deterministic(rng):
    value, bound = sample_I(SubordinatorSpec.drift_only(2.0), 0.5, 1e-10, rng)
    assert value == pytest.approx(1.0)
    assert bound == 0.0


def test_sample_respects_truncation_target(cp_log2, rng):
    value, bound = sample_I(cp_log2, 1.0, 1e-8, rng)
    assert value > 0
    assert bound <= 1e-8


def test_compound_poisson_moments(cp_log2, rng):
    samples = ExpFunctionalSampler(cp_log2, 1.0, eps=1e-10).sample(20_000, rng)
    assert samples.tail_bounds.max() <= 1e-10
    for n in (1, 2, 3):
        estimate = moment_estimate(samples.values, n)
        assert estimate.within(i_moment(cp_log2, 1.0, n), rel_tol=0.05)


def test_compound_poisson_with_drift(rng):
    spec = SubordinatorSpec.compound_poisson(1.0, JumpLaw.exponential(1.0), drift=0.5)
    samples = ExpFunctionalSampler(spec, 1.5).sample(20_000, rng)
    assert moment_estimate(samples.values, 1).within(i_moment(spec, 1.5, 1), rel_tol=0.05)


def test_stable_mean_on_grid(stable_half, rng):
    samples = ExpFunctionalSampler(stable_half, 1.0, eps=1e-4, step=1e-2).sample(5000, rng)
    assert moment_estimate(samples.values, 1).within(1.0, rel_tol=0.05)


def test_sampler_arguments(stable_half):
    with pytest.raises(DomainError):
        ExpFunctionalSampler(stable_half, 0.0)
    with pytest.raises(UsageError):
        ExpFunctionalSampler(stable_half, 1.0, eps=0.0)


class TestStationaryLaw:
    def test_total_mass(self, cp_log2, rng):
        estimate = mu_functional(cp_log2, 1.0, np.ones_like, 20_000, rng)
        assert estimate.value == pytest.approx(1.0, abs=4.0 * estimate.stderr + 1e-3)

    def test_negative_moment(self, cp_log2, rng):
        target = entrance_negative_moment(cp_log2, 1.0, 2)
        assert target == pytest.approx(2.0 / math.log(2.0))
        estimate = mu_functional(cp_log2, 1.0, lambda x: np.power(x, -2.0), 20_000, rng)
        assert estimate.value == pytest.approx(target, abs=4.0 * estimate.stderr + 1e-3 * target)

    def test_entrance_first_moment(self, cp_log2):
        assert entrance_negative_moment(cp_log2, 1.0, 1) == pytest.approx(1.0 / math.log(2.0))

    def test_infinite_mean(self, stable_half, rng):
        with pytest.raises(DomainError):
            mu_functional(stable_half, 1.0, np.ones_like, 10, rng)
        with pytest.raises(DomainError):
            entrance_negative_moment(stable_half, 1.0, 1)


class TestLeftTails:
    def test_r_phi(self, stable_half):
        result = left_tail_asymptotic(stable_half, 1.0, math.exp(-10.0), TailTarget.R_PHI)
        expected = 1.0 / (special.gamma(1.5) * math.sqrt(0.1))
        assert result.harmonic == pytest.approx(expected, rel=1e-12)
        assert result.tail_scale == pytest.approx(math.exp(-10.0) * expected)

    def test_i_phi(self, stable_half):
        result = left_tail_asymptotic(stable_half, 1.0, math.exp(-10.0), "I_phi")
        assert result.target == TailTarget.I_PHI
        assert result.harmonic == pytest.approx(10.0 * math.sqrt(0.1) / special.gamma(1.5), rel=1e-12)

    def test_i_phi_needs_theta_subordinator(self, gamma_one):
        with pytest.raises(PreconditionError):
            left_tail_asymptotic(gamma_one, 1.0, 1e-5, TailTarget.I_PHI)

    def test_domain(self, stable_half):
        with pytest.raises(DomainError):
            left_tail_asymptotic(stable_half, 1.0, 0.1, TailTarget.R_PHI)

    def test_harmonic_statistic(self):
        assert harmonic_tail_statistic(np.array([0.5, 2.0, 4.0]), 1.0) == pytest.approx(0.25)
        with pytest.raises(UsageError):
            harmonic_tail_statistic(np.array([]), 1.0)
