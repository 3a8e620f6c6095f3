"""
Self-Similar Fragmentation

Binary conservative fragmentation with index alpha: a fragment of size x splits
at rate x^alpha into (U x, (1 - U) x). This module runs the population with a
priority-queue event loop, follows single tagged fragments, and evaluates the
Laplace exponent and Lévy tail of the tagged fragment's subordinator from the
splitting law. Long horizons are reached with weighted particles: when the
population passes a cap it is resampled proportionally to mass.
"""
import heapq
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from pssmp_limits.errors import (
    DomainError,
    NumericError,
    TruncationError,
    UnsupportedError,
    UsageError,
)
from pssmp_limits.mc_stats import EmpiricalDistribution
from pssmp_limits.schemas import validate_document
from pssmp_limits.subordinator_models import JumpLaw, SubordinatorSpec

logger = logging.getLogger(__name__)


class SplitLawKind(str, Enum):
    DETERMINISTIC = "deterministic"
    UNIFORM = "uniform"
    LOG_PARETO = "log_pareto"


class TagMode(str, Enum):
    LEFT_MOST = "left_most"
    SIZE_BIASED = "size_biased"


@dataclass(frozen=True)
class BinarySplitLaw:
    """
    Law of the left share U in (0, 1).

    deterministic: U = u0; uniform: U ~ Uniform(0, 1);
    log_pareto: -log U has survival (1 + x)^-beta.
    """

    kind: SplitLawKind
    u0: float = 0.5
    beta: float = 0.0

    def __post_init__(self):
        if self.kind == SplitLawKind.DETERMINISTIC and not 0.0 < self.u0 < 1.0:
            raise DomainError(f"Deterministic share must lie in (0, 1), got {self.u0}")
        if self.kind == SplitLawKind.LOG_PARETO and not self.beta > 0:
            raise DomainError(f"Log-Pareto index must be positive, got {self.beta}")

    @classmethod
    def deterministic(cls, u0: float = 0.5) -> "BinarySplitLaw":
        return cls(SplitLawKind.DETERMINISTIC, u0=u0)

    @classmethod
    def uniform(cls) -> "BinarySplitLaw":
        return cls(SplitLawKind.UNIFORM)

    @classmethod
    def log_pareto(cls, beta: float) -> "BinarySplitLaw":
        return cls(SplitLawKind.LOG_PARETO, beta=beta)

    def sample_u(self, rng: np.random.Generator, size: Optional[int] = None):
        if self.kind == SplitLawKind.DETERMINISTIC:
            return np.full(size, self.u0) if size is not None else self.u0
        if self.kind == SplitLawKind.UNIFORM:
            return 1.0 - rng.random(size)
        jumps = np.power(1.0 - rng.random(size), -1.0 / self.beta) - 1.0
        return np.exp(-jumps)

    def sample_log_shares(self, rng: np.random.Generator, size: int) -> Tuple[np.ndarray, np.ndarray]:
        """(log U, log(1 - U)) computed without underflow of U."""
        if self.kind == SplitLawKind.DETERMINISTIC:
            return np.full(size, math.log(self.u0)), np.full(size, math.log1p(-self.u0))
        if self.kind == SplitLawKind.UNIFORM:
            u = 1.0 - rng.random(size)
            with np.errstate(divide="ignore"):
                return np.log(u), np.log1p(-u)
        jumps = np.power(1.0 - rng.random(size), -1.0 / self.beta) - 1.0
        with np.errstate(divide="ignore"):
            return -jumps, np.log(-np.expm1(-jumps))

    def left_jump_law(self) -> JumpLaw:
        """Law of -log U, the jumps of the left-most fragment's subordinator."""
        if self.kind == SplitLawKind.DETERMINISTIC:
            return JumpLaw.point_mass(-math.log(self.u0))
        if self.kind == SplitLawKind.UNIFORM:
            return JumpLaw.exponential(1.0)
        return JumpLaw.pareto_log_tail(self.beta)

    def _jump_density(self, j: float) -> float:
        return self.beta * (1.0 + j) ** (-self.beta - 1.0)

    def _quad(self, func, lo: float, hi: float) -> float:
        value, abserr = integrate.quad(func, lo, hi, limit=200)
        if abserr > 1e-6 * max(abs(value), 1e-300) and abserr > 1e-12:
            raise NumericError(
                "Quadrature against the splitting law did not converge",
                {"value": value, "abserr": abserr},
            )
        return value

    def phi(self, q: float) -> float:
        """Phi(q) = E(1 - U^(q+1) - (1-U)^(q+1))."""
        if q < 0:
            raise DomainError(f"Fragmentation exponent needs q >= 0, got {q}")
        if self.kind == SplitLawKind.DETERMINISTIC:
            return 1.0 - self.u0 ** (q + 1.0) - (1.0 - self.u0) ** (q + 1.0)
        if self.kind == SplitLawKind.UNIFORM:
            return q / (q + 2.0)
        return self._quad(
            lambda j: (
                -math.expm1(-(q + 1.0) * j) - (-math.expm1(-j)) ** (q + 1.0)
            ) * self._jump_density(j),
            0.0,
            np.inf,
        )

    def levy_tail(self, x: float) -> float:
        """Pi(]x, inf[) = E(U 1{U < e^-x} + (1-U) 1{1-U < e^-x}) of the size-biased fragment."""
        if x < 0:
            raise DomainError(f"Lévy tail needs x >= 0, got {x}")
        cut = math.exp(-x)
        if self.kind == SplitLawKind.DETERMINISTIC:
            u = self.u0
            return u * (u < cut) + (1.0 - u) * ((1.0 - u) < cut)
        if self.kind == SplitLawKind.UNIFORM:
            return cut * cut
        first = self._quad(lambda j: math.exp(-j) * self._jump_density(j), x, np.inf)
        upper = np.inf if x == 0 else -math.log1p(-cut)
        second = self._quad(lambda j: -math.expm1(-j) * self._jump_density(j), 0.0, upper)
        return first + second

    def tagged_subordinator(self, mode: TagMode) -> SubordinatorSpec:
        """Compound Poisson subordinator of -log(tagged size), rate 1."""
        mode = TagMode(mode)
        if mode == TagMode.LEFT_MOST:
            return SubordinatorSpec.compound_poisson(1.0, self.left_jump_law())
        if self.kind == SplitLawKind.DETERMINISTIC and self.u0 == 0.5:
            return SubordinatorSpec.compound_poisson(1.0, JumpLaw.point_mass(math.log(2.0)))
        if self.kind == SplitLawKind.UNIFORM:
            return SubordinatorSpec.compound_poisson(1.0, JumpLaw.exponential(2.0))
        raise UnsupportedError(f"No closed jump law for the size-biased fragment of {self.kind.value}")

    def to_document(self) -> Dict[str, Any]:
        if self.kind == SplitLawKind.DETERMINISTIC:
            return {"kind": self.kind.value, "u0": self.u0}
        if self.kind == SplitLawKind.LOG_PARETO:
            return {"kind": self.kind.value, "beta": self.beta}
        return {"kind": self.kind.value}

    @classmethod
    def from_document(cls, doc: Dict[str, Any]) -> "BinarySplitLaw":
        """
        Build a splitting law from its document form.

        Raises:
            ConfigError: If the document does not match the split_law schema
        """
        validate_document(doc, "split_law", "split_law")
        return cls(SplitLawKind(doc["kind"]), **{k: float(v) for k, v in doc.items() if k != "kind"})


@dataclass
class Snapshot:
    """Fragment sizes and mass weights at one time."""

    time: float
    sizes: np.ndarray
    weights: np.ndarray

    def to_rows(self) -> List[Dict[str, float]]:
        return [
            {"time": self.time, "size": float(s), "weight": float(w)}
            for s, w in zip(self.sizes, self.weights)
        ]


@dataclass
class FragmentationRun:
    snapshots: List[Snapshot]
    achieved_time: float
    events: int
    resamplings: int = 0


@dataclass
class TaggedTrace:
    event_times: np.ndarray
    sizes: np.ndarray


@dataclass
class _Population:
    """Live fragments keyed by id; split fragments are dropped, ids are never reused."""

    sizes: Dict[int, float] = field(default_factory=dict)
    weights: Dict[int, float] = field(default_factory=dict)
    next_id: int = 0

    @property
    def count(self) -> int:
        return len(self.sizes)

    def add(self, size: float, weight: float) -> int:
        pid = self.next_id
        self.sizes[pid] = size
        self.weights[pid] = weight
        self.next_id += 1
        return pid

    def kill(self, pid: int) -> None:
        del self.sizes[pid]
        del self.weights[pid]

    def is_alive(self, pid: int) -> bool:
        return pid in self.sizes

    def live_ids(self) -> List[int]:
        return list(self.sizes)


class FragmentationSimulator:
    """Event-driven population of fragments."""

    def __init__(
        self,
        alpha: float,
        split_law: BinarySplitLaw,
        size_floor: float = math.exp(-80.0),
        particle_cap: int = 1_000_000,
        resample_cap: Optional[int] = None,
    ):
        """
        Initialize the simulator.

        Args:
            alpha: Self-similarity index (split rate x^alpha)
            split_law: Law of the left share U
            size_floor: Fragments below this size are frozen (never split)
            particle_cap: Population size that aborts an unweighted run
            resample_cap: If set, resample by mass down to half this size instead
        """
        if not alpha > 0:
            raise DomainError(f"alpha must be positive, got {alpha}")
        if size_floor < 0:
            raise UsageError(f"Size floor must be non-negative, got {size_floor}")
        if resample_cap is not None and resample_cap < 4:
            raise UsageError(f"Resample cap must be at least 4, got {resample_cap}")
        self.logger = logging.getLogger(__name__)
        self.alpha = alpha
        self.split_law = split_law
        self.size_floor = size_floor
        self.particle_cap = particle_cap
        self.resample_cap = resample_cap

    def _schedule(self, heap: list, pop: _Population, pid: int, now: float, rng: np.random.Generator) -> None:
        size = pop.sizes[pid]
        if size <= 0.0 or size < self.size_floor:
            return
        heapq.heappush(heap, (now + rng.standard_exponential() / size ** self.alpha, pid))

    def simulate(
        self, t_max: float, rng: np.random.Generator, snapshot_times: Sequence[float] = ()
    ) -> FragmentationRun:
        """
        Run from a single fragment of size 1 up to t_max.

        Raises:
            TruncationError: If the population exceeds particle_cap without resampling
        """
        if not t_max > 0:
            raise UsageError(f"Fragmentation horizon must be positive, got {t_max}")
        snaps = sorted(float(s) for s in snapshot_times)
        if snaps and (snaps[0] < 0 or snaps[-1] > t_max):
            raise UsageError("Snapshot times must lie in [0, t_max]")

        pop = _Population()
        heap: List[Tuple[float, int]] = []
        self._schedule(heap, pop, pop.add(1.0, 1.0), 0.0, rng)
        recorded: List[Snapshot] = []
        events = resamplings = 0

        while heap and heap[0][0] <= t_max:
            now, pid = heapq.heappop(heap)
            if not pop.is_alive(pid):
                continue
            while snaps and snaps[0] < now:
                recorded.append(self._snapshot(pop, snaps.pop(0)))

            u = float(self.split_law.sample_u(rng))
            size, weight = pop.sizes[pid], pop.weights[pid]
            pop.kill(pid)
            for share in (u, 1.0 - u):
                self._schedule(heap, pop, pop.add(size * share, weight * share), now, rng)
            events += 1

            if pop.count > (self.resample_cap or self.particle_cap):
                if self.resample_cap is None:
                    raise TruncationError(
                        f"Population exceeded {self.particle_cap} particles at t={now:.6g}",
                        achieved_time=now,
                    )
                pop, heap = self._resample(pop, now, rng)
                resamplings += 1

        for s in snaps:
            recorded.append(self._snapshot(pop, s))
        self.logger.debug(
            f"Fragmentation reached t={t_max:.4g} after {events} splits "
            f"({pop.count} fragments, {resamplings} resamplings)"
        )
        return FragmentationRun(recorded, t_max, events, resamplings)

    def _resample(
        self, pop: _Population, now: float, rng: np.random.Generator
    ) -> Tuple[_Population, List[Tuple[float, int]]]:
        ids = pop.live_ids()
        weights = np.array([pop.weights[i] for i in ids])
        total = weights.sum()
        keep = self.resample_cap // 2
        # systematic resampling proportional to mass
        positions = (np.arange(keep) + rng.random()) * (total / keep)
        chosen = np.minimum(np.searchsorted(np.cumsum(weights), positions, side="right"), len(ids) - 1)

        fresh = _Population()
        heap: List[Tuple[float, int]] = []
        for k in chosen:
            pid = fresh.add(pop.sizes[ids[k]], total / keep)
            self._schedule(heap, fresh, pid, now, rng)
        heapq.heapify(heap)
        return fresh, heap

    @staticmethod
    def _snapshot(pop: _Population, time: float) -> Snapshot:
        ids = pop.live_ids()
        return Snapshot(
            time,
            np.array([pop.sizes[i] for i in ids]),
            np.array([pop.weights[i] for i in ids]),
        )


def empirical_rho(snapshot: Snapshot, t: Optional[float] = None) -> EmpiricalDistribution:
    """rho_t = sum of mass-weighted point masses at log(size) / log t."""
    t = snapshot.time if t is None else t
    if not t > 1.0:
        raise DomainError(f"rho_t needs t > 1, got {t}")
    sizes = snapshot.sizes
    keep = sizes > 0
    return EmpiricalDistribution.from_samples(
        np.log(sizes[keep]) / math.log(t), snapshot.weights[keep]
    )


def _tag_log_factor(law: BinarySplitLaw, mode: TagMode, rng: np.random.Generator, size: int) -> np.ndarray:
    log_u, log_rest = law.sample_log_shares(rng, size)
    if mode == TagMode.LEFT_MOST:
        return log_u
    # the size-biased fragment follows the left piece with probability U
    return np.where(rng.random(size) < np.exp(log_u), log_u, log_rest)


def tagged_fragment(
    alpha: float, law: BinarySplitLaw, t_max: float, rng: np.random.Generator, mode: TagMode = TagMode.LEFT_MOST
) -> TaggedTrace:
    """Follow one fragment up to t_max, independently of any population run."""
    if not alpha > 0 or not t_max > 0:
        raise DomainError("Tagged fragment needs alpha > 0 and t_max > 0")
    mode = TagMode(mode)
    times, sizes = [0.0], [1.0]
    now, log_size = 0.0, 0.0
    while True:
        now += rng.standard_exponential() * math.exp(-alpha * log_size)
        if now > t_max:
            break
        log_size += float(_tag_log_factor(law, mode, rng, 1)[0])
        times.append(now)
        sizes.append(math.exp(log_size))
    return TaggedTrace(np.array(times), np.array(sizes))


def tagged_log_sizes_at(
    alpha: float,
    law: BinarySplitLaw,
    t: float,
    n: int,
    rng: np.random.Generator,
    mode: TagMode = TagMode.LEFT_MOST,
) -> np.ndarray:
    """log of the tagged fragment size at time t for n independent fragments."""
    if not alpha > 0 or not t > 0 or n < 1:
        raise DomainError("Tagged sampling needs alpha > 0, t > 0 and n >= 1")
    mode = TagMode(mode)
    log_size = np.zeros(n)
    now = np.zeros(n)
    active = np.arange(n)
    while active.size:
        now[active] += rng.standard_exponential(active.size) * np.exp(-alpha * log_size[active])
        split = now[active] <= t
        active = active[split]
        log_size[active] += _tag_log_factor(law, mode, rng, active.size)
    return log_size


def tagged_jump_sizes(law: BinarySplitLaw, n: int, rng: np.random.Generator, mode: TagMode) -> np.ndarray:
    """Jumps -log(factor) of -log(tagged size) at its splits."""
    return -_tag_log_factor(law, TagMode(mode), rng, n)


def phi_fragmentation(law: BinarySplitLaw, q: float) -> float:
    return law.phi(q)


def levy_tail_from_nu(law: BinarySplitLaw, x: float) -> float:
    return law.levy_tail(x)


def fragmentation_rv_index(law: BinarySplitLaw, grid: Sequence[float] = (1e-3, 1e-4, 1e-5, 1e-6, 1e-7)) -> float:
    """Slope of log Phi against log q near 0; equals 1 whenever Phi'(0+) is finite."""
    q = np.asarray(grid, dtype=float)
    values = np.array([law.phi(x) for x in q])
    slope, _ = np.polyfit(np.log(q), np.log(values), 1)
    return float(slope)
