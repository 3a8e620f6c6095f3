import math

import numpy as np
import pytest
from scipy import stats

from pssmp_limits.errors import DomainError, UsageError
from pssmp_limits.path_engine import (
    GridPath,
    JumpDriftPath,
    PathSimulator,
    doubling_schedule,
    first_passage,
    running_ratio_stats,
    simulate_path,
    tail_infima,
)
from pssmp_limits.subordinator_models import JumpLaw, SubordinatorSpec


def test_drift_only_path_is_linear(rng):
    path = simulate_path(SubordinatorSpec.drift_only(1.0), 5.0, None, rng)
    assert isinstance(path, JumpDriftPath)
    assert path.jump_times.size == 0
    assert path.value_at(3.5) == pytest.approx(3.5)
    assert path.terminal_value == pytest.approx(5.0)


def test_poisson_jump_count(rng):
    spec = SubordinatorSpec.compound_poisson(1.0, JumpLaw.point_mass(1.0))
    counts = [simulate_path(spec, 10.0, None, rng).jump_times.size for _ in range(400)]
    assert abs(np.mean(counts) - 10.0) <= 4.0 * math.sqrt(10.0 / 400)


def test_grid_path_needs_step(stable_half, rng):
    with pytest.raises(UsageError):
        PathSimulator().simulate_path(stable_half, 1.0, rng)


def test_grid_terminal_value_matches_increment_law(stable_half, rng):
    simulator = PathSimulator(step=1e-2)
    terminal = [simulator.simulate_path(stable_half, 1.0, rng).terminal_value for _ in range(2000)]
    direct = stable_half.sample_increment(1.0, rng, 2000)
    assert stats.ks_2samp(terminal, direct).pvalue > 1e-3


def test_jump_drift_left_and_right_values():
    path = JumpDriftPath(0.5, [2.0], [5.0], 4.0)
    assert path.value_before(2.0) == pytest.approx(1.0)
    assert path.value_at(2.0) == pytest.approx(6.0)
    starts, lengths, levels, slopes = path.segments()
    np.testing.assert_allclose(starts, [0.0, 2.0])
    np.testing.assert_allclose(lengths, [2.0, 2.0])
    np.testing.assert_allclose(levels, [0.0, 6.0])
    np.testing.assert_allclose(slopes, [0.5, 0.5])


class TestFirstPassage:
    def test_continuous_crossing(self):
        record = first_passage(JumpDriftPath(1.0, [], [], 10.0), 3.0)
        assert record.passed
        assert record.passage_time == pytest.approx(3.0)
        assert record.undershoot == 0.0
        assert record.overshoot == 0.0

    def test_jump_crossing(self):
        record = first_passage(JumpDriftPath(0.0, [2.0], [5.0], 10.0), 3.0)
        assert record.passage_time == 2.0
        assert record.undershoot == pytest.approx(3.0)
        assert record.overshoot == pytest.approx(2.0)

    def test_level_not_reached(self):
        record = first_passage(JumpDriftPath(0.0, [1.0], [1.0], 2.0), 3.0)
        assert not record.passed
        assert record.passage_time == math.inf
        assert math.isnan(record.undershoot)

    def test_grid_path(self):
        path = GridPath(0.5, [0.0, 1.0, 1.5, 4.0])
        record = first_passage(path, 2.0)
        assert record.passage_time == pytest.approx(1.5)
        assert record.undershoot == pytest.approx(0.5)
        assert record.overshoot == pytest.approx(2.0)

    def test_negative_level(self):
        with pytest.raises(DomainError):
            first_passage(JumpDriftPath(1.0, [], [], 1.0), -1.0)

    def test_scaled_age_is_arcsine_for_stable(self, stable_half, rng):
        simulator = PathSimulator(step=1e-4)
        ages = []
        for _ in range(1000):
            path = simulator.simulate_to_level(stable_half, 1.0, rng, tail=1e-4)
            ages.append(first_passage(path, 1.0).undershoot)
        result = stats.kstest(ages, stats.beta(0.5, 0.5).cdf)
        assert result.statistic <= 0.07


class TestSimulateToLevel:
    def test_exact_model_passes_level(self, cp_log2, rng):
        path = PathSimulator().simulate_to_level(cp_log2, 20.0, rng, tail=2.0)
        record = first_passage(path, 20.0)
        assert record.passed
        assert path.horizon == pytest.approx(record.passage_time + 2.0)

    def test_grid_model_passes_level(self, gamma_one, rng):
        path = PathSimulator(step=0.01).simulate_to_level(gamma_one, 5.0, rng)
        assert path.terminal_value > 5.0

    def test_drift_only(self, rng):
        path = PathSimulator().simulate_to_level(SubordinatorSpec.drift_only(2.0), 6.0, rng, tail=1.0)
        assert path.horizon == pytest.approx(4.0)


def test_skeleton_is_increasing(stable_half, rng):
    values = PathSimulator().sample_skeleton(stable_half, doubling_schedule(1.0, 10), rng)
    assert values.shape == (11,)
    assert np.all(np.diff(values) >= 0)


class TestRunningRatio:
    def test_linear_path(self):
        path = JumpDriftPath(1.0, [], [], 1024.0)
        trace = running_ratio_stats(path.value_at, lambda t: t, doubling_schedule(1.0, 10))
        np.testing.assert_allclose(trace.running_min, 1.0)
        np.testing.assert_allclose(trace.running_max, 1.0)

    def test_running_extremes(self):
        trace = running_ratio_stats([3.0, 1.0, 2.0], lambda t: 1.0, [1.0, 2.0, 3.0])
        np.testing.assert_allclose(trace.running_min, [3.0, 1.0, 1.0])
        np.testing.assert_allclose(trace.running_max, [3.0, 3.0, 3.0])

    def test_empty_schedule(self):
        with pytest.raises(UsageError):
            running_ratio_stats([], lambda t: t, [])

    def test_tail_infima(self):
        ratios = [5.0, 1.0, 4.0, 2.0, 3.0]
        np.testing.assert_allclose(tail_infima(ratios, 3), [2.0, 2.0, 3.0])
        np.testing.assert_allclose(tail_infima(ratios, 5), [1.0, 1.0, 2.0, 2.0, 3.0])

    def test_tail_infima_rows(self):
        rising = np.array([[1.0, 1.1, 1.2, 1.3]])
        falling = np.array([[1.0, 0.9, 0.8, 0.7]])
        np.testing.assert_allclose(tail_infima(rising, 2), [[1.2, 1.3]])
        np.testing.assert_allclose(tail_infima(falling, 2), [[0.8, 0.7]])

    @pytest.mark.parametrize("count", [0, 5])
    def test_tail_count_range(self, count):
        with pytest.raises(UsageError):
            tail_infima([1.0, 2.0, 3.0, 4.0], count)


def test_doubling_schedule():
    np.testing.assert_allclose(doubling_schedule(3.0, 3), [3.0, 6.0, 12.0, 24.0])
    with pytest.raises(UsageError):
        doubling_schedule(0.0, 3)
