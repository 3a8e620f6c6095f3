"""
Exponential Functional

Monte Carlo and closed-form tools for I = integral of exp(-alpha xi_s) over
[0, infinity): samplers with a certified truncation bound, the moment formulas of
I and of its companion R_phi, the stationary law mu of the pssMp seen from zero,
and the small-s asymptotics of the left tails of I and R_phi.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Tuple

import numpy as np
from scipy import special

from pssmp_limits.errors import (
    DegenerateLawError,
    DomainError,
    NumericError,
    PreconditionError,
    UsageError,
)
from pssmp_limits.lamperti import log_expm1_ratio
from pssmp_limits.subordinator_models import SubordinatorKind, SubordinatorSpec

logger = logging.getLogger(__name__)

_BLOCK_STEPS = 512
_GRID_CHUNK = 4096
_MAX_ROUNDS = 1_000_000


@dataclass
class ExpFunctionalSamples:
    """Truncated samples of I and the bound on each discarded tail."""

    values: np.ndarray
    tail_bounds: np.ndarray


@dataclass
class MuEstimate:
    value: float
    stderr: float
    samples: int


class TailTarget(str, Enum):
    R_PHI = "R_phi"
    I_PHI = "I_phi"


@dataclass
class LeftTailAsymptotic:
    """Asymptotic E(1_{Z > s} / Z) and the o(.) scale of P(Z <= s)."""

    target: TailTarget
    s: float
    harmonic: float
    tail_scale: float


class ExpFunctionalSampler:
    """
    Sample I = integral of exp(-alpha xi) by simulating xi in blocks.

    A sample stops once exp(-alpha xi_H) / phi(alpha), the expected remaining
    contribution, falls below eps. Compound Poisson paths are integrated exactly
    between jumps; grid paths are read as linear between nodes.
    """

    def __init__(self, spec: SubordinatorSpec, alpha: float, eps: float = 1e-10, step: float = 1e-3):
        if not alpha > 0:
            raise DomainError(f"alpha must be positive, got {alpha}")
        if not eps > 0:
            raise UsageError(f"Truncation target must be positive, got {eps}")
        if not step > 0:
            raise UsageError(f"Grid step must be positive, got {step}")
        self.logger = logging.getLogger(__name__)
        self.spec = spec
        self.alpha = alpha
        self.eps = eps
        self.step = step
        self.phi_alpha = float(spec.phi(alpha))
        # stop once xi exceeds this level
        self.stop_level = -math.log(eps * self.phi_alpha) / alpha

    def sample(self, n: int, rng: np.random.Generator) -> ExpFunctionalSamples:
        if n < 1:
            raise UsageError(f"Sample size must be positive, got {n}")
        spec = self.spec
        if spec.kind == SubordinatorKind.DRIFT_ONLY:
            return ExpFunctionalSamples(np.full(n, 1.0 / (self.alpha * spec.drift)), np.zeros(n))
        if spec.kind == SubordinatorKind.COMPOUND_POISSON:
            values, levels = self._sample_jump_drift(n, rng)
        else:
            parts = [self._sample_grid(min(_GRID_CHUNK, n - lo), rng) for lo in range(0, n, _GRID_CHUNK)]
            values = np.concatenate([p[0] for p in parts])
            levels = np.concatenate([p[1] for p in parts])
        tail = np.exp(-self.alpha * levels) / self.phi_alpha
        self.logger.debug(f"Sampled {n} exponential functionals, worst tail bound {tail.max():.3g}")
        return ExpFunctionalSamples(values, tail)

    def _sample_jump_drift(self, n: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
        spec, alpha = self.spec, self.alpha
        values = np.zeros(n)
        levels = np.zeros(n)
        active = np.arange(n)
        for _ in range(_MAX_ROUNDS):
            if active.size == 0:
                return values, levels
            wait = rng.exponential(1.0 / spec.rate, active.size)
            x = alpha * spec.drift * wait
            with np.errstate(divide="ignore"):
                values[active] += np.exp(np.log(wait) - alpha * levels[active] - x + log_expm1_ratio(x))
            levels[active] += spec.drift * wait + spec.jump_law.sample(rng, active.size)
            active = active[levels[active] <= self.stop_level]
        raise NumericError("Exponential functional sampler did not terminate", {"active": int(active.size)})

    def _sample_grid(self, n: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
        spec, alpha, h = self.spec, self.alpha, self.step
        values = np.zeros(n)
        levels = np.zeros(n)
        active = np.arange(n)
        for _ in range(_MAX_ROUNDS):
            if active.size == 0:
                return values, levels
            steps = spec.sample_increment(h, rng, active.size * _BLOCK_STEPS).reshape(active.size, _BLOCK_STEPS)
            ends = levels[active, None] + np.cumsum(steps, axis=1)
            x = alpha * steps
            # h exp(-alpha v_{j+1}) (e^x - 1)/x is the cell integral of the linear interpolant
            cells = h * np.exp(-alpha * ends + log_expm1_ratio(x))
            values[active] += cells.sum(axis=1)
            levels[active] = ends[:, -1]
            active = active[levels[active] <= self.stop_level]
        raise NumericError("Exponential functional sampler did not terminate", {"active": int(active.size)})


def sample_I(
    spec: SubordinatorSpec, alpha: float, eps: float, rng: np.random.Generator, step: float = 1e-3
) -> Tuple[float, float]:
    """One sample of I with its tail bound."""
    result = ExpFunctionalSampler(spec, alpha, eps, step).sample(1, rng)
    return float(result.values[0]), float(result.tail_bounds[0])


def r_phi_moment(spec: SubordinatorSpec, alpha: float, n: int) -> float:
    """E(R_phi^n) = product of phi(alpha k), k = 1..n."""
    if n < 0:
        raise DomainError(f"Moment order must be non-negative, got {n}")
    return float(np.prod([spec.phi(alpha * k) for k in range(1, n + 1)]))


def i_moment(spec: SubordinatorSpec, alpha: float, n: int) -> float:
    """E(I^n) = n! / product of phi(alpha k), k = 1..n."""
    denominator = r_phi_moment(spec, alpha, n)
    if denominator == 0.0:
        raise DegenerateLawError("phi vanishes on the moment grid", flag="I=inf")
    return math.factorial(n) / denominator


def mu_functional(
    spec: SubordinatorSpec,
    alpha: float,
    f: Callable[[np.ndarray], np.ndarray],
    n: int,
    rng: np.random.Generator,
    eps: float = 1e-10,
    step: float = 1e-3,
) -> MuEstimate:
    """
    Estimate mu(f) = E(f(I^(-1/alpha)) / I) / (alpha m), m = E(xi_1).

    Raises:
        DomainError: If the subordinator has infinite mean
    """
    m = spec.mean()
    if not math.isfinite(m):
        raise DomainError("The stationary law mu needs a finite mean E(xi_1)")
    samples = ExpFunctionalSampler(spec, alpha, eps, step).sample(n, rng).values
    terms = np.asarray(f(np.power(samples, -1.0 / alpha)), dtype=float) / samples / (alpha * m)
    stderr = float(terms.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return MuEstimate(float(terms.mean()), stderr, n)


def entrance_negative_moment(spec: SubordinatorSpec, alpha: float, k: int) -> float:
    """mu(x^(-alpha k)) = E(I^(k-1)) / (alpha m) for k >= 1."""
    if k < 1:
        raise DomainError(f"Order must be at least 1, got {k}")
    m = spec.mean()
    if not math.isfinite(m):
        raise DomainError("Entrance moments need a finite mean E(xi_1)")
    return i_moment(spec, alpha, k - 1) / (alpha * m)


def left_tail_asymptotic(
    spec: SubordinatorSpec, alpha: float, s: float, target: TailTarget
) -> LeftTailAsymptotic:
    """
    Small-s behaviour of E(1_{Z > s}/Z) and of the scale bounding P(Z <= s).

    For R_phi: E ~ 1 / (alpha^beta Gamma(1+beta) phi(1/log(1/s))).
    For I_phi: E ~ alpha^beta log(1/s) phi(1/log(1/s)) / Gamma(2-beta), which needs
    lambda/phi(lambda) to be a Laplace exponent.
    """
    if not 0.0 < s < math.exp(-math.e):
        raise DomainError(f"Left-tail asymptotics need 0 < s < e^-e, got {s}")
    beta = spec.rv_index
    if not 0.0 < beta <= 1.0:
        raise PreconditionError(f"Left-tail asymptotics need an index in (0, 1], got {beta}")
    target = TailTarget(target)
    log_inv = math.log(1.0 / s)
    phi_scale = float(spec.phi(1.0 / log_inv))

    if target == TailTarget.R_PHI:
        harmonic = 1.0 / (alpha ** beta * special.gamma(1.0 + beta) * phi_scale)
    else:
        if not spec.is_theta_subordinator:
            raise PreconditionError("I_phi asymptotics need lambda/phi(lambda) to be a Laplace exponent")
        harmonic = alpha ** beta * log_inv * phi_scale / special.gamma(2.0 - beta)
    return LeftTailAsymptotic(target, s, float(harmonic), float(s * harmonic))


def harmonic_tail_statistic(samples: np.ndarray, s: float) -> float:
    """Monte Carlo E(1_{Z > s} / Z)."""
    z = np.asarray(samples, dtype=float)
    if z.size == 0:
        raise UsageError("Harmonic statistic needs samples")
    return float(np.mean(np.where(z > s, 1.0 / z, 0.0)))
