"""
Subordinator Path Engine

This module simulates sample paths of subordinators and reads first-passage data
off them. Compound Poisson and drift-only models are stored exactly as jump times,
jump sizes and a drift; every other model is stored on a uniform time grid and
read as linear between grid nodes. Both representations expose the same segment
view, which is what the Lamperti clock integrates.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from pssmp_limits.errors import DomainError, NumericError, UsageError
from pssmp_limits.subordinator_models import SubordinatorKind, SubordinatorSpec

logger = logging.getLogger(__name__)

_GRID_BLOCK_STEPS = 4096
_JUMP_CHUNK = 256
_MAX_BLOCKS = 100_000


class SubordinatorPath:
    """Common interface of the two path representations."""

    horizon: float

    def value_at(self, s: float) -> float:
        """Right-continuous value xi_s."""
        raise NotImplementedError

    def value_before(self, s: float) -> float:
        """Left limit xi_{s-}."""
        raise NotImplementedError

    def segments(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """
        Piecewise-linear decomposition of the path on [0, horizon].

        Returns:
            (starts, lengths, levels, slopes): on segment i,
            xi(u) = levels[i] + slopes[i] * (u - starts[i])
        """
        raise NotImplementedError

    @property
    def terminal_value(self) -> float:
        return self.value_before(self.horizon)


@dataclass
class JumpDriftPath(SubordinatorPath):
    """Exact path: drift times t plus the jumps that occurred by t."""

    drift: float
    jump_times: np.ndarray
    jump_sizes: np.ndarray
    horizon: float
    cum_jumps: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.jump_times = np.asarray(self.jump_times, dtype=float)
        self.jump_sizes = np.asarray(self.jump_sizes, dtype=float)
        if self.jump_times.shape != self.jump_sizes.shape:
            raise UsageError("Jump times and sizes must have the same length")
        if np.any(np.diff(self.jump_times) < 0):
            raise UsageError("Jump times must be sorted")
        self.cum_jumps = np.concatenate(([0.0], np.cumsum(self.jump_sizes)))

    def value_at(self, s: float) -> float:
        k = np.searchsorted(self.jump_times, s, side="right")
        return float(self.cum_jumps[k] + self.drift * s)

    def value_before(self, s: float) -> float:
        k = np.searchsorted(self.jump_times, s, side="left")
        return float(self.cum_jumps[k] + self.drift * s)

    def segments(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        bounds = np.concatenate(([0.0], self.jump_times, [self.horizon]))
        starts = bounds[:-1]
        lengths = np.diff(bounds)
        levels = self.cum_jumps + self.drift * starts
        slopes = np.full(starts.shape, self.drift)
        return starts, lengths, levels, slopes


@dataclass
class GridPath(SubordinatorPath):
    """Path sampled at multiples of a fixed step, values[0] = 0."""

    step: float
    values: np.ndarray
    horizon: float = field(init=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not self.step > 0:
            raise UsageError(f"Grid step must be positive, got {self.step}")
        if self.values.size < 2:
            raise UsageError("Grid path needs at least two nodes")
        self.horizon = self.step * (self.values.size - 1)

    @property
    def times(self) -> np.ndarray:
        return self.step * np.arange(self.values.size)

    def value_at(self, s: float) -> float:
        return float(np.interp(s, self.times, self.values))

    def value_before(self, s: float) -> float:
        return self.value_at(s)

    def segments(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        starts = self.times[:-1]
        lengths = np.full(starts.shape, self.step)
        levels = self.values[:-1]
        slopes = np.diff(self.values) / self.step
        return starts, lengths, levels, slopes


@dataclass
class PassageRecord:
    """First passage strictly above a level: L = inf{s : xi_s > level}."""

    level: float
    passed: bool
    passage_time: float
    undershoot: float
    overshoot: float
    value_before: float
    value_at: float


@dataclass
class RatioTrace:
    """Ratios along a time schedule with their running extremes."""

    times: np.ndarray
    ratios: np.ndarray
    running_min: np.ndarray
    running_max: np.ndarray


class PathSimulator:
    """Simulate subordinator paths exactly where possible and on a grid otherwise."""

    def __init__(self, step: Optional[float] = None):
        """
        Initialize the simulator.

        Args:
            step: Grid step for models without an exact jump representation
        """
        self.logger = logging.getLogger(__name__)
        self.step = step

    def _grid_step(self, step: Optional[float]) -> float:
        h = step if step is not None else self.step
        if h is None or not h > 0:
            raise UsageError(f"Grid simulation needs a positive step, got {h}")
        return float(h)

    def simulate_path(
        self,
        spec: SubordinatorSpec,
        horizon: float,
        rng: np.random.Generator,
        step: Optional[float] = None,
    ) -> SubordinatorPath:
        """
        Simulate xi on [0, horizon].

        Args:
            spec: Subordinator model
            horizon: Positive time horizon
            rng: Random generator
            step: Grid step (ignored for exact models)

        Returns:
            JumpDriftPath for compound Poisson and drift-only models, GridPath otherwise
        """
        if not horizon > 0:
            raise UsageError(f"Horizon must be positive, got {horizon}")

        if spec.has_jumps_only_finitely:
            times, sizes = self._poisson_jumps(spec, 0.0, horizon, rng)
            return JumpDriftPath(spec.drift, times, sizes, horizon)

        h = self._grid_step(step)
        n = max(1, int(math.ceil(horizon / h - 1e-9)))
        increments = spec.sample_increment(h, rng, n)
        return GridPath(h, np.concatenate(([0.0], np.cumsum(increments))))

    def simulate_to_level(
        self,
        spec: SubordinatorSpec,
        level: float,
        rng: np.random.Generator,
        step: Optional[float] = None,
        tail: float = 1.0,
    ) -> SubordinatorPath:
        """
        Simulate until xi first exceeds a level, then a further stretch of length tail.

        The returned horizon H satisfies xi_H > level, which bounds the Lamperti
        clock from below by tail * exp(alpha * level).
        """
        if level < 0:
            raise DomainError(f"Target level must be non-negative, got {level}")

        if spec.kind == SubordinatorKind.DRIFT_ONLY:
            return JumpDriftPath(spec.drift, [], [], level / spec.drift + tail)
        if spec.has_jumps_only_finitely:
            return self._jump_drift_to_level(spec, level, rng, tail)

        h = self._grid_step(step)
        blocks: List[np.ndarray] = [np.zeros(1)]
        current = 0.0
        for count in range(_MAX_BLOCKS):
            block = current + np.cumsum(spec.sample_increment(h, rng, _GRID_BLOCK_STEPS))
            blocks.append(block)
            current = float(block[-1])
            if current > level:
                break
        else:
            raise NumericError(
                f"Path did not reach level {level} within {_MAX_BLOCKS} blocks",
                {"level": level, "reached": current},
            )

        extra = int(math.ceil(tail / h))
        blocks.append(current + np.cumsum(spec.sample_increment(h, rng, extra)))
        values = np.concatenate(blocks)
        self.logger.debug(
            f"Grid path reached level {level} after {count + 1} blocks "
            f"({values.size} nodes, horizon {h * (values.size - 1):.4g})"
        )
        return GridPath(h, values)

    def _jump_drift_to_level(
        self, spec: SubordinatorSpec, level: float, rng: np.random.Generator, tail: float
    ) -> JumpDriftPath:
        times: List[np.ndarray] = []
        sizes: List[np.ndarray] = []
        last_time, carried = 0.0, 0.0
        for _ in range(_MAX_BLOCKS):
            t = last_time + np.cumsum(rng.exponential(1.0 / spec.rate, _JUMP_CHUNK))
            j = spec.jump_law.sample(rng, _JUMP_CHUNK)
            post = carried + np.cumsum(j) + spec.drift * t
            hit = np.flatnonzero(post > level)
            if hit.size:
                k = hit[0] + 1
                times.append(t[:k])
                sizes.append(j[:k])
                last_time = float(t[k - 1])
                break
            times.append(t)
            sizes.append(j)
            last_time, carried = float(t[-1]), carried + float(j.sum())
        else:
            raise NumericError(f"Jump path did not reach level {level}", {"level": level})

        horizon = last_time + tail
        # memoryless arrivals: the remaining jumps in (last_time, horizon]
        more_t, more_j = self._poisson_jumps(spec, last_time, horizon, rng)
        return JumpDriftPath(
            spec.drift,
            np.concatenate(times + [more_t]),
            np.concatenate(sizes + [more_j]),
            horizon,
        )

    @staticmethod
    def _poisson_jumps(
        spec: SubordinatorSpec, start: float, end: float, rng: np.random.Generator
    ) -> Tuple[np.ndarray, np.ndarray]:
        if spec.kind == SubordinatorKind.DRIFT_ONLY:
            return np.empty(0), np.empty(0)
        count = rng.poisson(spec.rate * (end - start))
        times = np.sort(rng.uniform(start, end, count))
        return times, spec.jump_law.sample(rng, count)

    def sample_skeleton(
        self, spec: SubordinatorSpec, times: Sequence[float], rng: np.random.Generator
    ) -> np.ndarray:
        """Exact values of xi at increasing positive times."""
        t = np.asarray(times, dtype=float)
        gaps = np.diff(np.concatenate(([0.0], t)))
        if np.any(gaps <= 0):
            raise UsageError("Skeleton times must be positive and strictly increasing")
        increments = np.array([spec.sample_increment(g, rng) for g in gaps])
        return np.cumsum(increments)


def simulate_path(
    spec: SubordinatorSpec, horizon: float, step: Optional[float], rng: np.random.Generator
) -> SubordinatorPath:
    """Module-level entry point for PathSimulator.simulate_path."""
    return PathSimulator(step).simulate_path(spec, horizon, rng)


def first_passage(path: SubordinatorPath, level: float) -> PassageRecord:
    """
    First passage of xi strictly above a level, with undershoot and overshoot.

    Exact on jump-drift paths. On grid paths the passage is located at the first
    node above the level and (A, R) are read from the bracketing nodes.

    Args:
        path: Simulated path
        level: Non-negative level b

    Returns:
        PassageRecord; when the level is not passed by the horizon, passed is False,
        the passage time and overshoot are infinite and the undershoot is NaN
    """
    if level < 0:
        raise DomainError(f"Passage level must be non-negative, got {level}")

    if isinstance(path, GridPath):
        above = np.flatnonzero(path.values > level)
        if above.size == 0:
            return _not_passed(level)
        i = int(above[0])
        before, after = float(path.values[i - 1]), float(path.values[i])
        return PassageRecord(level, True, i * path.step, level - before, after - level, before, after)

    starts, lengths, levels, slopes = path.segments()
    ends = levels + slopes * lengths
    by_jump = levels > level
    by_drift = (levels <= level) & (ends > level) & (slopes > 0)
    hits = np.flatnonzero(by_jump | by_drift)
    if hits.size == 0:
        return _not_passed(level)

    i = int(hits[0])
    if by_jump[i]:
        t = float(starts[i])
        before, after = path.value_before(t), path.value_at(t)
        return PassageRecord(
            level, True, t, max(level - before, 0.0), max(after - level, 0.0), before, after
        )
    t = float(starts[i] + (level - levels[i]) / slopes[i])
    return PassageRecord(level, True, t, 0.0, 0.0, level, level)


def _not_passed(level: float) -> PassageRecord:
    return PassageRecord(level, False, math.inf, math.nan, math.inf, math.nan, math.nan)


def running_ratio_stats(
    numerator: Union[Sequence[float], np.ndarray, Callable[[float], float]],
    denominator: Callable[[float], float],
    times: Sequence[float],
) -> RatioTrace:
    """
    Ratios numerator(t)/denominator(t) along a schedule with running min and max.

    Args:
        numerator: Values at the schedule times, or a callable of t
        denominator: Callable of t
        times: Increasing schedule (typically geometric doubling)
    """
    t = np.asarray(times, dtype=float)
    if t.size == 0:
        raise UsageError("Ratio schedule is empty")
    if callable(numerator):
        num = np.array([numerator(x) for x in t], dtype=float)
    else:
        num = np.asarray(numerator, dtype=float)
    den = np.array([denominator(x) for x in t], dtype=float)
    ratios = num / den
    return RatioTrace(t, ratios, np.minimum.accumulate(ratios), np.maximum.accumulate(ratios))


def tail_infima(ratios: Union[Sequence[float], np.ndarray], count: int) -> np.ndarray:
    """
    Infimum of the ratios from each of the last `count` schedule points onward.

    Entry k of the result is min(ratios[n - count + k:]) along the last axis, so the
    first entry looks furthest back and the last is the final ratio itself.

    Raises:
        UsageError: If count is not between 1 and the schedule length
    """
    r = np.asarray(ratios, dtype=float)
    if not 1 <= count <= r.shape[-1]:
        raise UsageError(f"Tail count {count} outside 1..{r.shape[-1]}")
    backward = np.minimum.accumulate(r[..., ::-1], axis=-1)[..., ::-1]
    return backward[..., -count:]


def doubling_schedule(t0: float, doublings: int) -> np.ndarray:
    """Times t0, 2 t0, ..., 2^doublings t0."""
    if not t0 > 0 or doublings < 0:
        raise UsageError(f"Invalid doubling schedule t0={t0}, doublings={doublings}")
    return t0 * np.power(2.0, np.arange(doublings + 1))
