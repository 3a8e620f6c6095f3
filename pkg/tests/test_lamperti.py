import math

import numpy as np
import pytest
from scipy import stats

from pssmp_limits.errors import ClockRangeError, PreconditionError, UnsupportedError
from pssmp_limits.lamperti import (
    LampertiClock,
    PssmpPath,
    clock_integral,
    ergodic_average,
    lamperti_forward,
    lamperti_inverse,
    log_expm1_ratio,
    short_time_samples,
)
from pssmp_limits.path_engine import GridPath, JumpDriftPath, PathSimulator
from pssmp_limits.subordinator_models import JumpLaw, SubordinatorSpec


def test_log_expm1_ratio():
    np.testing.assert_allclose(log_expm1_ratio([0.0, 1e-12, 1.0]), [0.0, 5e-13, math.log(math.e - 1.0)], atol=1e-13)
    # stays finite where e^x overflows
    assert log_expm1_ratio(1000.0) == pytest.approx(1000.0 - math.log(1000.0))


class TestClock:
    def test_zero_path(self):
        clock = LampertiClock(JumpDriftPath(0.0, [], [], 10.0), 1.5)
        assert clock.clock(4.0) == pytest.approx(4.0)
        assert clock.tau(4.0) == pytest.approx(4.0)

    @pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
    def test_linear_path(self, c):
        alpha = 0.7
        clock = LampertiClock(JumpDriftPath(c, [], [], 60.0), alpha)
        s = np.linspace(0.0, 60.0, 50)
        np.testing.assert_allclose(clock.clock(s), np.expm1(alpha * c * s) / (alpha * c), rtol=1e-12)
        t = np.geomspace(1e-3, 1e6, 50)
        np.testing.assert_allclose(clock.tau(t), np.log1p(alpha * c * t) / (alpha * c), rtol=1e-10)

    def test_single_jump(self):
        clock = LampertiClock(JumpDriftPath(0.0, [1.0], [1.0], 3.0), 1.0)
        assert clock.clock(2.0) == pytest.approx(1.0 + math.e)
        assert clock.tau(1.0 + math.e) == pytest.approx(2.0)

    def test_clock_inverts_tau(self, rng):
        path = PathSimulator().simulate_path(
            SubordinatorSpec.compound_poisson(2.0, JumpLaw.exponential(1.0), drift=0.3), 20.0, rng
        )
        clock = LampertiClock(path, 1.3)
        log_t = np.linspace(-5.0, clock.log_c_horizon - 1e-6, 1000)
        tau, _ = clock.tau_log(log_t)
        np.testing.assert_allclose(clock.log_clock(tau), log_t, atol=1e-9)

    @pytest.mark.parametrize("seed", range(50))
    def test_tau_increments_bounded_by_speed(self, seed):
        """tau(t2) - tau(t1) <= (t2 - t1) exp(-alpha xi(tau(t1))) since xi never decreases."""
        rng = np.random.default_rng(seed)
        alpha = 1.0
        # drift alone pushes C(40) past 1e4
        path = PathSimulator().simulate_path(
            SubordinatorSpec.compound_poisson(1.0, JumpLaw.exponential(1.0), drift=0.3), 40.0, rng
        )
        clock = LampertiClock(path, alpha)
        t = np.sort(rng.uniform(0.0, 1.0e4, 200))
        with np.errstate(divide="ignore"):
            tau, xi = clock.tau_log(np.log(t))
        bound = np.diff(t) * np.exp(-alpha * xi[:-1])
        assert np.all(np.diff(tau) >= 0.0)
        assert np.all(np.diff(tau) <= bound * (1.0 + 1e-10) + 1e-12)

    def test_huge_horizon_stays_finite(self, rng):
        path = PathSimulator().simulate_to_level(SubordinatorSpec.drift_only(1.0), 800.0, rng)
        clock = LampertiClock(path, 1.0)
        assert clock.log_c_horizon == pytest.approx(801.0, abs=1e-9)
        tau, xi = clock.tau_log(700.0)
        assert tau == pytest.approx(math.log1p(math.exp(700.0)), rel=1e-12)
        assert xi == pytest.approx(tau)

    def test_beyond_horizon(self):
        clock = LampertiClock(JumpDriftPath(0.0, [], [], 1.0), 1.0)
        with pytest.raises(ClockRangeError) as info:
            clock.tau(2.0)
        assert info.value.log_c_horizon == pytest.approx(0.0)


class TestForward:
    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
    def test_closed_form(self, alpha, c):
        t = np.linspace(0.0, 50.0, 1000)
        samples = lamperti_forward(JumpDriftPath(c, [], [], 40.0), alpha, 1.0, t)
        np.testing.assert_allclose(samples.values, np.power(1.0 + alpha * c * t, 1.0 / alpha), rtol=1e-12, atol=1e-9)

    def test_constant_path(self):
        samples = lamperti_forward(JumpDriftPath(0.0, [], [], 10.0), 1.0, 3.0, [0.5, 5.0])
        np.testing.assert_allclose(samples.values, 3.0)

    def test_rows(self):
        rows = lamperti_forward(JumpDriftPath(1.0, [], [], 5.0), 1.0, 1.0, [1.0]).to_rows()
        assert set(rows[0]) == {"t", "X", "tau", "logC"}
        assert rows[0]["X"] == pytest.approx(2.0)

    def test_scaling_property(self, stable_half, rng):
        """c X(t/c) under P_1 has the law of X(t) under P_c."""
        simulator = PathSimulator(step=1e-3)
        c, t = 2.0, 8.0
        scaled, started = [], []
        for _ in range(600):
            path = simulator.simulate_to_level(stable_half, 4.0, rng)
            scaled.append(c * PssmpPath(1.0, 1.0, path).value_at(t / c))
            path = simulator.simulate_to_level(stable_half, 4.0, rng)
            started.append(PssmpPath(1.0, c, path).value_at(t))
        assert stats.ks_2samp(scaled, started).pvalue > 1e-3


class TestInverse:
    def test_round_trip_compound_poisson(self, rng):
        spec = SubordinatorSpec.compound_poisson(1.0, JumpLaw.point_mass(1.0))
        path = PathSimulator().simulate_path(spec, 10.0, rng)
        recovered = lamperti_inverse(PssmpPath(1.0, 1.0, path))
        np.testing.assert_allclose(recovered.jump_times, path.jump_times, atol=1e-9)
        np.testing.assert_allclose(recovered.jump_sizes, path.jump_sizes, atol=1e-9)
        assert recovered.horizon == pytest.approx(10.0, abs=1e-9)

    def test_round_trip_linear(self):
        recovered = lamperti_inverse(PssmpPath(1.5, 1.0, JumpDriftPath(0.8, [], [], 7.0)))
        assert recovered.drift == pytest.approx(0.8, abs=1e-9)
        assert recovered.horizon == pytest.approx(7.0, rel=1e-12)

    def test_round_trip_mixed(self):
        spec = SubordinatorSpec.compound_poisson(1.5, JumpLaw.exponential(2.0), drift=0.4)
        worst = 0.0
        for seed in range(100):
            path = PathSimulator().simulate_path(spec, 8.0, np.random.default_rng(seed))
            recovered = lamperti_inverse(PssmpPath(0.8, 2.0, path))
            worst = max(
                worst,
                np.max(np.abs(recovered.jump_times - path.jump_times), initial=0.0),
                np.max(np.abs(recovered.jump_sizes - path.jump_sizes), initial=0.0),
                abs(recovered.drift - path.drift),
            )
        assert worst < 1e-9

    def test_grid_path_unsupported(self):
        with pytest.raises(UnsupportedError):
            lamperti_inverse(PssmpPath(1.0, 1.0, GridPath(0.1, [0.0, 0.1, 0.3])))


class TestClockIntegral:
    def test_constant_path(self):
        x_path = PssmpPath(1.0, 1.0, JumpDriftPath(0.0, [], [], 10.0))
        assert clock_integral(x_path, 4.0) == pytest.approx(4.0)
        assert clock_integral(x_path, 4.0, method="direct") == pytest.approx(4.0)

    def test_linear_path(self):
        alpha, c, t = 2.0, 0.5, 30.0
        x_path = PssmpPath(alpha, 1.0, JumpDriftPath(c, [], [], 20.0))
        expected = math.log1p(alpha * c * t) / (alpha * c)
        assert clock_integral(x_path, t) == pytest.approx(expected, rel=1e-12)
        assert clock_integral(x_path, t, method="direct") == pytest.approx(expected, rel=1e-10)

    def test_methods_agree_on_jump_paths(self, rng):
        spec = SubordinatorSpec.compound_poisson(1.0, JumpLaw.exponential(1.0), drift=0.2)
        x_path = PssmpPath(1.0, 1.5, PathSimulator().simulate_to_level(spec, 15.0, rng))
        for t in (0.3, 10.0, 1e4, 1e6):
            assert clock_integral(x_path, t, method="direct") == pytest.approx(clock_integral(x_path, t), rel=1e-9)


class TestErgodicAverage:
    def test_constant_function(self, cp_log2, rng):
        x_path = PssmpPath(1.0, 1.0, PathSimulator().simulate_to_level(cp_log2, 30.0, rng))
        assert ergodic_average(x_path, np.ones_like, math.exp(20.0)) == pytest.approx(1.0, abs=1e-6)
        assert ergodic_average(x_path, np.ones_like, math.exp(20.0), t_start=5.0) == pytest.approx(1.0, abs=1e-6)

    def test_finite_mean_limit(self, cp_log2, rng):
        averages = []
        for _ in range(10):
            x_path = PssmpPath(1.0, 1.0, PathSimulator().simulate_to_level(cp_log2, 50.0, rng))
            averages.append(ergodic_average(x_path, lambda x: 1.0 / x, math.exp(40.0)))
        assert np.mean(averages) == pytest.approx(1.0 / math.log(2.0), rel=0.1)


class TestShortTime:
    def test_requires_regular_variation_at_infinity(self, gamma_one, rng):
        with pytest.raises(PreconditionError):
            short_time_samples(gamma_one, 1.0, 1e-6, 10, rng)
        with pytest.raises(PreconditionError):
            short_time_samples(SubordinatorSpec.drift_only(1.0), 1.0, 1e-6, 10, rng)

    def test_matches_subordinator_at_small_time(self, stable_half, rng):
        t = 1e-6
        samples = short_time_samples(stable_half, 1.0, t, 1000, rng, steps=32)
        direct = stable_half.phi_inverse(1.0 / t) * stable_half.sample_increment(t, rng, 1000)
        assert stats.ks_2samp(samples, direct).pvalue > 1e-3
