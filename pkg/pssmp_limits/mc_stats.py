"""
Monte Carlo Statistics

Empirical distributions (optionally mass-weighted), Kolmogorov-Smirnov distances
against analytic CDFs, moment estimates with standard errors, binned chi-square
tests, and the seed plan that gives every replicate its own reproducible stream.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from pssmp_limits.errors import UsageError

logger = logging.getLogger(__name__)


@dataclass
class EmpiricalDistribution:
    """Sorted distinct atoms with normalized weights."""

    atoms: np.ndarray
    weights: np.ndarray
    n: int

    @classmethod
    def from_samples(
        cls, samples: Sequence[float], weights: Optional[Sequence[float]] = None
    ) -> "EmpiricalDistribution":
        x = np.asarray(samples, dtype=float).ravel()
        if x.size == 0:
            raise UsageError("Empirical distribution needs at least one sample")
        w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float).ravel()
        if w.shape != x.shape or np.any(w < 0) or not w.sum() > 0:
            raise UsageError("Weights must be non-negative, not all zero, one per sample")
        atoms, inverse = np.unique(x, return_inverse=True)
        merged = np.bincount(inverse, weights=w)
        return cls(atoms, merged / merged.sum(), x.size)

    @property
    def effective_size(self) -> float:
        """Kish effective sample size 1 / sum(w^2) of the normalized weights."""
        return float(1.0 / np.sum(self.weights ** 2))

    def cdf(self, x: Sequence[float]) -> np.ndarray:
        cum = np.concatenate(([0.0], np.cumsum(self.weights)))
        return cum[np.searchsorted(self.atoms, np.asarray(x, dtype=float), side="right")]

    def mean(self) -> float:
        return float(np.dot(self.atoms, self.weights))


def ks_distance(emp: EmpiricalDistribution, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """sup |F_emp - F| using both one-sided limits of F_emp at every atom."""
    theoretical = np.asarray(cdf(emp.atoms), dtype=float)
    right = np.cumsum(emp.weights)
    left = right - emp.weights
    return float(max(np.max(np.abs(theoretical - right)), np.max(np.abs(theoretical - left))))


def ks_critical_value(n: float, level: float = 0.01) -> float:
    """Asymptotic one-sample KS critical value sqrt(-log(level/2)/2) / sqrt(n)."""
    if not n > 0:
        raise UsageError(f"Critical value needs a positive sample size, got {n}")
    return math.sqrt(-math.log(level / 2.0) / 2.0) / math.sqrt(n)


def ks_two_sample(a: Sequence[float], b: Sequence[float]) -> Tuple[float, float]:
    """Two-sample KS statistic and its asymptotic 1% critical value."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise UsageError("Two-sample KS needs non-empty samples")
    statistic = stats.ks_2samp(a, b).statistic
    critical = math.sqrt(-math.log(0.005) / 2.0) * math.sqrt((a.size + b.size) / (a.size * b.size))
    return float(statistic), critical


@dataclass
class MomentEstimate:
    value: float
    stderr: float
    degenerate: bool = False

    def within(self, target: float, rel_tol: float, sigmas: float = 4.0) -> bool:
        """Agreement up to rel_tol or the given number of standard errors."""
        gap = abs(self.value - target)
        return gap <= rel_tol * abs(target) or gap <= sigmas * self.stderr


def moment_estimate(samples: Sequence[float], n: int) -> MomentEstimate:
    """Sample mean of X^n with its standard error; degenerate for constant samples."""
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise UsageError("Moment estimation needs at least two samples")
    powers = np.power(x, n)
    spread = float(powers.std(ddof=1))
    return MomentEstimate(float(powers.mean()), spread / math.sqrt(x.size), spread == 0.0)


@dataclass
class Chi2Result:
    statistic: float
    dof: int
    critical_value: float

    @property
    def passed(self) -> bool:
        return self.statistic <= self.critical_value


def binned_chi2(
    samples_2d: Tuple[np.ndarray, np.ndarray],
    cell_probability: Callable[[float, float, float, float], float],
    edges_x: Sequence[float],
    edges_y: Sequence[float],
    min_expected: float = 5.0,
    level: float = 0.01,
) -> Chi2Result:
    """
    Pearson chi-square of 2-D samples against cell probabilities.

    Cells are visited row by row and merged with their successors until each
    expected count reaches min_expected.
    """
    x, y = (np.asarray(s, dtype=float) for s in samples_2d)
    if x.size == 0 or x.shape != y.shape:
        raise UsageError("Chi-square needs paired, non-empty samples")
    ex = np.asarray(edges_x, dtype=float)
    ey = np.asarray(edges_y, dtype=float)
    counts, _, _ = np.histogram2d(x, y, bins=[ex, ey])
    probs = np.array([
        [cell_probability(ex[i], ex[i + 1], ey[j], ey[j + 1]) for j in range(ey.size - 1)]
        for i in range(ex.size - 1)
    ])
    observed: List[float] = []
    expected: List[float] = []
    acc_o = acc_e = 0.0
    for o, p in zip(counts.ravel(), probs.ravel() * x.size):
        acc_o += o
        acc_e += p
        if acc_e >= min_expected:
            observed.append(acc_o)
            expected.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 or acc_o > 0:
        if expected:
            observed[-1] += acc_o
            expected[-1] += acc_e
        else:
            observed.append(acc_o)
            expected.append(acc_e)
    if len(expected) < 2:
        raise UsageError("Too few cells for a chi-square test")

    o = np.array(observed)
    e = np.array(expected)
    statistic = float(np.sum((o - e) ** 2 / e))
    dof = len(expected) - 1
    return Chi2Result(statistic, dof, float(stats.chi2.ppf(1.0 - level, dof)))


class SeedPlan:
    """
    Counter-based random streams: stream(index) depends only on (master, index).

    Replicates therefore produce the same numbers whatever the scheduling order
    or the number of workers.
    """

    def __init__(self, master_seed: int):
        if master_seed < 0:
            raise UsageError(f"Master seed must be non-negative, got {master_seed}")
        self.master_seed = int(master_seed)

    def seed_sequence(self, index: int, purpose: int = 0) -> np.random.SeedSequence:
        return np.random.SeedSequence(entropy=self.master_seed, spawn_key=(int(index), int(purpose)))

    def stream(self, index: int, purpose: int = 0) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed_sequence(index, purpose)))
