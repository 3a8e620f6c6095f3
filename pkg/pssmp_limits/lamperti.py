"""
Lamperti Transformation

This module turns a subordinator path xi into the increasing positive self-similar
Markov process X(t) = x0 exp(xi_{tau(t x0^-alpha)}), where tau inverts the clock
C_s = integral of exp(alpha xi_u) over [0, s]. The clock is accumulated per path
segment in log space, so horizons with log C in the hundreds stay exact. The
inverse direction recovers xi from X through the clock integral of X^-alpha.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np
from scipy import integrate

from pssmp_limits.errors import (
    ClockRangeError,
    DomainError,
    PreconditionError,
    UnsupportedError,
    UsageError,
)
from pssmp_limits.path_engine import JumpDriftPath, PathSimulator, SubordinatorPath
from pssmp_limits.subordinator_models import SubordinatorSpec

logger = logging.getLogger(__name__)

ArrayLike = Union[float, Sequence[float], np.ndarray]


def log_expm1_ratio(x: ArrayLike) -> np.ndarray:
    """log((e^x - 1) / x) for x >= 0, continuous at 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        value = x + np.log(-np.expm1(-x)) - np.log(x)
    return np.where(x > 0, value, 0.0)


class LampertiClock:
    """Exponential functional C_s of one path, stored per segment in log space."""

    def __init__(self, path: SubordinatorPath, alpha: float):
        if not alpha > 0:
            raise DomainError(f"Self-similarity index must be positive, got {alpha}")
        self.logger = logging.getLogger(__name__)
        self.alpha = alpha
        self.starts, self.lengths, self.levels, self.slopes = path.segments()

        with np.errstate(divide="ignore"):
            log_lengths = np.log(self.lengths)
        self.log_segment = (
            alpha * self.levels + log_lengths
            + log_expm1_ratio(alpha * self.slopes * self.lengths)
        )
        self.log_cum_end = np.logaddexp.accumulate(self.log_segment)
        self.log_cum_start = np.concatenate(([-np.inf], self.log_cum_end[:-1]))
        self.horizon = float(self.starts[-1] + self.lengths[-1])

    @property
    def log_c_horizon(self) -> float:
        return float(self.log_cum_end[-1])

    def log_clock(self, s: ArrayLike) -> np.ndarray:
        """log C_s for s in [0, horizon]."""
        s = np.asarray(s, dtype=float)
        if np.any(s < 0):
            raise DomainError("Clock time must be non-negative")
        if np.any(s > self.horizon):
            raise ClockRangeError(
                f"Clock queried beyond the path horizon {self.horizon}", self.log_c_horizon
            )
        seg = np.clip(np.searchsorted(self.starts, s, side="right") - 1, 0, self.starts.size - 1)
        delta = s - self.starts[seg]
        with np.errstate(divide="ignore"):
            partial = (
                self.alpha * self.levels[seg] + np.log(delta)
                + log_expm1_ratio(self.alpha * self.slopes[seg] * delta)
            )
        return np.logaddexp(self.log_cum_start[seg], partial)

    def clock(self, s: ArrayLike) -> np.ndarray:
        return np.exp(self.log_clock(s))

    def tau_log(self, log_t: ArrayLike):
        """
        Inverse clock tau(t) = inf{s : C_s > t} from log t, with xi at tau.

        Returns:
            (tau, xi_tau) arrays with the shape of log_t

        Raises:
            ClockRangeError: If t >= C_horizon
        """
        log_t = np.asarray(log_t, dtype=float)
        seg = np.searchsorted(self.log_cum_end, log_t, side="right")
        if np.any(seg >= self.log_cum_end.size):
            raise ClockRangeError(
                f"Inverse clock queried at log t={np.max(log_t):.6g} beyond "
                f"log C_horizon={self.log_c_horizon:.6g}",
                self.log_c_horizon,
            )
        a = self.alpha * self.levels[seg]
        b = self.alpha * self.slopes[seg]
        with np.errstate(divide="ignore", invalid="ignore"):
            # log(t - C_start) without forming t
            log_rest = log_t + np.log1p(-np.exp(self.log_cum_start[seg] - log_t))
            log_z = np.log(b) + log_rest - a
            delta = np.where(
                b > 0,
                np.logaddexp(0.0, log_z) / b,
                np.exp(log_rest - a),
            )
        delta = np.where(np.isneginf(log_t), 0.0, delta)
        delta = np.clip(delta, 0.0, self.lengths[seg])
        tau = self.starts[seg] + delta
        xi = self.levels[seg] + self.slopes[seg] * delta
        return tau, xi

    def tau(self, t: ArrayLike) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise DomainError("Clock value must be non-negative")
        with np.errstate(divide="ignore"):
            return self.tau_log(np.log(t))[0]


@dataclass
class PssmpSamples:
    """X sampled on a list of times, with the clock data behind each value."""

    times: np.ndarray
    values: np.ndarray
    taus: np.ndarray
    log_clock: np.ndarray

    def to_rows(self):
        return [
            {"t": t, "X": x, "tau": s, "logC": c}
            for t, x, s, c in zip(self.times, self.values, self.taus, self.log_clock)
        ]


@dataclass
class PssmpPath:
    """Increasing pssMp obtained from a subordinator path by the Lamperti map."""

    alpha: float
    x0: float
    base: SubordinatorPath
    clock: LampertiClock = field(init=False, repr=False)

    def __post_init__(self):
        if not self.x0 > 0:
            raise DomainError(f"Starting point must be positive, got {self.x0}")
        self.clock = LampertiClock(self.base, self.alpha)

    @property
    def log_time_horizon(self) -> float:
        """log of the largest X-time the path covers."""
        return self.clock.log_c_horizon + self.alpha * math.log(self.x0)

    def log_value_log_time(self, log_t: ArrayLike) -> np.ndarray:
        """log X(t) from log t."""
        _, xi = self.clock.tau_log(np.asarray(log_t) - self.alpha * math.log(self.x0))
        return math.log(self.x0) + xi

    def tau(self, t: ArrayLike) -> np.ndarray:
        """tau(t x0^-alpha): the subordinator time reached at X-time t."""
        with np.errstate(divide="ignore"):
            log_t = np.log(np.asarray(t, dtype=float))
        return self.clock.tau_log(log_t - self.alpha * math.log(self.x0))[0]

    def value_at(self, t: ArrayLike) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.exp(self.log_value_log_time(np.log(np.asarray(t, dtype=float))))

    def sample(self, times: ArrayLike) -> PssmpSamples:
        t = np.asarray(times, dtype=float)
        if np.any(t < 0):
            raise DomainError("Sampling times must be non-negative")
        with np.errstate(divide="ignore"):
            log_u = np.log(t) - self.alpha * math.log(self.x0)
        taus, xi = self.clock.tau_log(log_u)
        return PssmpSamples(t, self.x0 * np.exp(xi), taus, log_u)

    def x_segments(self):
        """
        X observed per inter-jump stretch.

        Returns:
            (log_durations, log_start_values, log_end_values): X-time length of each
            stretch and log X at its start and just before its end
        """
        log_x0 = math.log(self.x0)
        clock = self.clock
        log_durations = self.alpha * log_x0 + clock.log_segment
        log_start = log_x0 + clock.levels
        log_end = log_start + clock.slopes * clock.lengths
        return log_durations, log_start, log_end


def lamperti_forward(
    path: SubordinatorPath, alpha: float, x0: float, times: ArrayLike
) -> PssmpSamples:
    """Sample X(t) = x0 exp(xi_{tau(t x0^-alpha)}) at the given times."""
    return PssmpPath(alpha, x0, path).sample(times)


def lamperti_inverse(x_path: PssmpPath) -> JumpDriftPath:
    """
    Recover the subordinator from X through gamma = inverse of integral X^-alpha.

    Only X observations enter: durations of the inter-jump stretches and the values
    of X at their ends. Between jumps X^alpha grows linearly, which gives each
    stretch's length in subordinator time in closed form.

    Raises:
        UnsupportedError: For pssMps built from grid paths
    """
    if not isinstance(x_path.base, JumpDriftPath):
        raise UnsupportedError("Inverse Lamperti is only available for jump-drift paths")

    alpha = x_path.alpha
    log_durations, log_start, log_end = x_path.x_segments()
    rise = log_end - log_start
    with np.errstate(divide="ignore"):
        log_lengths = log_durations - log_expm1_ratio(alpha * rise) - alpha * log_start
    lengths = np.exp(log_lengths)

    total = float(lengths.sum())
    jump_times = np.cumsum(lengths)[:-1]
    jump_sizes = log_start[1:] - log_end[:-1]
    drift = float(rise.sum() / total) if total > 0 else 0.0
    logger.debug(f"Inverted pssMp into {jump_sizes.size} jumps over horizon {total:.6g}")
    return JumpDriftPath(drift, jump_times, jump_sizes, total)


def clock_integral(x_path: PssmpPath, t: float, method: str = "identity") -> float:
    """
    Integral of X_s^-alpha over [0, t].

    Args:
        x_path: pssMp path
        t: X-time
        method: 'identity' uses tau(t x0^-alpha); 'direct' integrates X stretch by stretch
    """
    if t < 0:
        raise DomainError(f"Clock integral needs t >= 0, got {t}")
    if method == "identity":
        return float(x_path.tau(t))
    if method != "direct":
        raise UsageError(f"Unknown clock integral method '{method}'")
    if t == 0:
        return 0.0

    alpha = x_path.alpha
    log_durations, log_start, log_end = x_path.x_segments()
    log_epoch_end = np.logaddexp.accumulate(log_durations)
    log_t = math.log(t)
    j = int(np.searchsorted(log_epoch_end, log_t, side="right"))
    if j >= log_epoch_end.size:
        raise ClockRangeError(f"Clock integral queried beyond the path at t={t}", x_path.log_time_horizon)

    y = alpha * (log_end - log_start)
    with np.errstate(divide="ignore"):
        lengths = np.exp(log_durations - log_expm1_ratio(y) - alpha * log_start)
    done = float(lengths[:j].sum())
    epoch = math.exp(log_epoch_end[j - 1]) if j > 0 else 0.0
    delta = t - epoch
    if y[j] > 0:
        w = math.expm1(y[j]) * delta / math.exp(log_durations[j])
        return done + lengths[j] * math.log1p(w) / y[j]
    return done + delta * math.exp(-alpha * log_start[j])


def ergodic_average(
    x_path: PssmpPath,
    f: Callable[[np.ndarray], np.ndarray],
    t: float,
    t_start: float = 1.0,
    nodes_per_decade: int = 400,
) -> float:
    """
    Logarithmic-time average (1/log(t/t_start)) of f(s^(-1/alpha) X(s)) ds/s.

    Trapezoid rule in log s with the given node density.
    """
    if not t > t_start > 0:
        raise DomainError(f"Ergodic average needs t > t_start > 0, got t={t}, t_start={t_start}")
    lo, hi = math.log(t_start), math.log(t)
    nodes = max(2, int(math.ceil(nodes_per_decade * (hi - lo) / math.log(10.0))) + 1)
    log_s = np.linspace(lo, hi, nodes)
    log_x = x_path.log_value_log_time(log_s)
    values = np.asarray(f(np.exp(log_x - log_s / x_path.alpha)), dtype=float)
    return float(integrate.trapezoid(values, log_s) / (hi - lo))


def short_time_samples(
    spec: SubordinatorSpec,
    alpha: float,
    t: float,
    n: int,
    rng: np.random.Generator,
    steps: int = 64,
) -> np.ndarray:
    """
    Samples of h(t) log X(t) under P_1, h = phi_inverse(1/t).

    Requires phi to be regularly varying at infinity with index in (0, 1).
    """
    index = spec.rv_index_at_infinity
    if not 0.0 < index < 1.0:
        raise PreconditionError(
            f"Short-time scaling needs phi regularly varying at infinity with index "
            f"in (0, 1); {spec.kind.value} has index {index}"
        )
    if not t > 0 or n < 1:
        raise UsageError(f"Short-time sampling needs t > 0 and n >= 1, got t={t}, n={n}")

    h = spec.phi_inverse(1.0 / t)
    simulator = PathSimulator(step=2.0 * t / steps)
    log_t = math.log(t)
    out = np.empty(n)
    for i in range(n):
        # C_{2t} > t because xi >= 0, so tau(t) lies inside the horizon
        path = simulator.simulate_path(spec, 2.0 * t, rng)
        _, xi = LampertiClock(path, alpha).tau_log(log_t)
        out[i] = h * float(xi)
    return out
