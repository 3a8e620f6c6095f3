"""
Subordinator Models

This module describes the increasing Lévy processes (subordinators) that drive the
Lamperti representation: their Laplace exponents, generalized inverses, increment
samplers and declared regular-variation indices. Specs are immutable and can be
round-tripped through plain JSON-compatible documents.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np
from scipy import integrate, optimize, special

from pssmp_limits.errors import (
    DomainError,
    NumericError,
    OutOfRangeError,
    UsageError,
)
from pssmp_limits.schemas import load_schema, validate_document

logger = logging.getLogger(__name__)

ArrayLike = Union[float, Sequence[float], np.ndarray]

# Above this argument the incomplete-gamma closed form overflows through e^lambda.
_PARETO_CLOSED_FORM_LIMIT = 500.0
_INVERSE_REL_TOL = 1e-12
_INVERSE_MAX_STEPS = 400


class JumpLawKind(str, Enum):
    POINT_MASS = "point_mass"
    PARETO_LOG_TAIL = "pareto_log_tail"
    EXPONENTIAL = "exponential"


class SubordinatorKind(str, Enum):
    STABLE = "stable"
    GAMMA = "gamma"
    TEMPERED_STABLE = "tempered_stable"
    COMPOUND_POISSON = "compound_poisson"
    DRIFT_ONLY = "drift_only"


def positive_stable(beta: float, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    """
    Draw positive stable variables with Laplace transform exp(-lambda^beta).

    Uses the Chambers-Mallows-Stuck (Kanter) representation evaluated in log space
    so that extreme draws neither overflow nor underflow.

    Args:
        beta: Stability index in (0, 1]
        rng: Random generator
        size: Number of draws (None for a scalar)

    Returns:
        Array (or scalar) of positive draws
    """
    if not 0.0 < beta <= 1.0:
        raise DomainError(f"Stable index must lie in (0, 1], got {beta}")
    if beta == 1.0:
        return np.ones(size) if size is not None else np.float64(1.0)

    # U in (0, pi] keeps every sine strictly positive
    u = math.pi * (1.0 - rng.random(size))
    e = rng.standard_exponential(size)
    log_s = (
        np.log(np.sin(beta * u))
        - np.log(np.sin(u)) / beta
        + (1.0 - beta) / beta * (np.log(np.sin((1.0 - beta) * u)) - np.log(e))
    )
    return np.exp(log_s)


@dataclass(frozen=True)
class JumpLaw:
    """Law of the jumps of a compound Poisson subordinator; P(J > 0) = 1."""

    kind: JumpLawKind
    x0: float = 0.0
    beta: float = 0.0
    rate: float = 0.0

    def __post_init__(self):
        if self.kind == JumpLawKind.POINT_MASS and not self.x0 > 0:
            raise DomainError(f"Point mass jump must be positive, got {self.x0}")
        if self.kind == JumpLawKind.PARETO_LOG_TAIL and not self.beta > 0:
            raise DomainError(f"Pareto tail index must be positive, got {self.beta}")
        if self.kind == JumpLawKind.EXPONENTIAL and not self.rate > 0:
            raise DomainError(f"Exponential rate must be positive, got {self.rate}")

    @classmethod
    def point_mass(cls, x0: float) -> "JumpLaw":
        return cls(JumpLawKind.POINT_MASS, x0=x0)

    @classmethod
    def pareto_log_tail(cls, beta: float) -> "JumpLaw":
        return cls(JumpLawKind.PARETO_LOG_TAIL, beta=beta)

    @classmethod
    def exponential(cls, rate: float) -> "JumpLaw":
        return cls(JumpLawKind.EXPONENTIAL, rate=rate)

    @property
    def tail_index(self) -> float:
        """Regular-variation index at 0 of E(1 - exp(-lambda J))."""
        if self.kind == JumpLawKind.PARETO_LOG_TAIL:
            return min(self.beta, 1.0)
        return 1.0

    @property
    def mean(self) -> float:
        if self.kind == JumpLawKind.POINT_MASS:
            return self.x0
        if self.kind == JumpLawKind.EXPONENTIAL:
            return 1.0 / self.rate
        return 1.0 / (self.beta - 1.0) if self.beta > 1.0 else math.inf

    def survival(self, x: ArrayLike) -> np.ndarray:
        """P(J > x)."""
        x = np.asarray(x, dtype=float)
        if self.kind == JumpLawKind.POINT_MASS:
            return np.where(x < self.x0, 1.0, 0.0)
        if self.kind == JumpLawKind.EXPONENTIAL:
            return np.exp(-self.rate * np.maximum(x, 0.0))
        return np.power(1.0 + np.maximum(x, 0.0), -self.beta)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == JumpLawKind.POINT_MASS:
            return np.full(size, self.x0)
        if self.kind == JumpLawKind.EXPONENTIAL:
            return rng.exponential(1.0 / self.rate, size)
        # inverse of the survival (1+x)^-beta; 1 - U avoids a zero base
        return np.power(1.0 - rng.random(size), -1.0 / self.beta) - 1.0

    def laplace_complement(self, lam: ArrayLike) -> np.ndarray:
        """E(1 - exp(-lambda J)) for lambda >= 0."""
        lam = np.asarray(lam, dtype=float)
        if self.kind == JumpLawKind.POINT_MASS:
            return -np.expm1(-lam * self.x0)
        if self.kind == JumpLawKind.EXPONENTIAL:
            return lam / (lam + self.rate)
        return self._pareto_laplace_complement(lam)

    def _pareto_laplace_complement(self, lam: np.ndarray) -> np.ndarray:
        flat = np.atleast_1d(lam).ravel()
        out = np.empty_like(flat)
        for i, value in enumerate(flat):
            if value == 0.0:
                out[i] = 0.0
            elif self.beta < 1.0 and value <= _PARETO_CLOSED_FORM_LIMIT:
                # lambda^beta e^lambda Gamma(1-beta, lambda)
                s = 1.0 - self.beta
                out[i] = (
                    value ** self.beta * math.exp(value)
                    * special.gamma(s) * special.gammaincc(s, value)
                )
            else:
                out[i] = self._pareto_quadrature(value)
        return out.reshape(np.shape(lam)) if np.ndim(lam) else out[0]

    def _pareto_quadrature(self, lam: float) -> float:
        # integral of e^-u (1 + u/lambda)^-beta over (0, inf); both scales 1 and lambda are breakpoints
        def integrand(u: float) -> float:
            return math.exp(-u) * (1.0 + u / lam) ** (-self.beta)

        cuts = sorted({0.0, min(lam, 1.0), 1.0, 40.0})
        total = 0.0
        for lo, hi in zip(cuts, cuts[1:] + [np.inf]):
            value, abserr = integrate.quad(integrand, lo, hi, limit=200)
            if abserr > 1e-6 * max(abs(value), 1e-300) and abserr > 1e-12:
                raise NumericError(
                    f"Quadrature for the Pareto Laplace exponent did not converge at lambda={lam}",
                    {"lambda": lam, "abserr": abserr, "value": value},
                )
            total += value
        return total

    def to_document(self) -> Dict[str, Any]:
        if self.kind == JumpLawKind.POINT_MASS:
            return {"kind": self.kind.value, "x0": self.x0}
        if self.kind == JumpLawKind.EXPONENTIAL:
            return {"kind": self.kind.value, "rate": self.rate}
        return {"kind": self.kind.value, "beta": self.beta}

    @classmethod
    def from_document(cls, doc: Dict[str, Any]) -> "JumpLaw":
        """
        Build a jump law from its document form.

        Raises:
            ConfigError: If the document does not match the jump_law schema
        """
        spec_schema = load_schema("subordinator_spec")
        validate_document(
            doc,
            {"$schema": spec_schema["$schema"], "$defs": spec_schema["$defs"], "$ref": "#/$defs/jump_law"},
            "jump_law",
        )
        return cls(JumpLawKind(doc["kind"]), **{k: float(v) for k, v in doc.items() if k != "kind"})


@dataclass(frozen=True)
class SubordinatorSpec:
    """
    Immutable description of a subordinator.

    Per-kind parameters:
        stable: index (beta), scale (c)            phi = c lambda^beta
        gamma: shape (a), rate (b)                 phi = a log(1 + lambda/b)
        tempered_stable: index (delta), tilt (theta), scale (c)
                                                   phi = c((lambda+theta)^delta - theta^delta)
        compound_poisson: rate (lambda0), jump_law phi = lambda0 E(1 - e^{-lambda J})
        drift_only: drift only
    Every kind adds drift * lambda.
    """

    kind: SubordinatorKind
    index: float = 0.0
    scale: float = 1.0
    shape: float = 0.0
    rate: float = 0.0
    tilt: float = 0.0
    jump_law: Optional[JumpLaw] = None
    drift: float = 0.0
    declared_rv_index: Optional[float] = None
    theta_subordinator: Optional[bool] = None

    def __post_init__(self):
        if self.drift < 0:
            raise DomainError(f"Drift must be non-negative, got {self.drift}")
        kind = self.kind
        if kind in (SubordinatorKind.STABLE, SubordinatorKind.TEMPERED_STABLE):
            if not 0.0 < self.index < 1.0:
                raise DomainError(f"{kind.value} index must lie in (0, 1), got {self.index}")
            if not self.scale > 0:
                raise DomainError(f"{kind.value} scale must be positive, got {self.scale}")
        if kind == SubordinatorKind.TEMPERED_STABLE and self.tilt < 0:
            raise DomainError(f"Tilt must be non-negative, got {self.tilt}")
        if kind == SubordinatorKind.GAMMA and not (self.shape > 0 and self.rate > 0):
            raise DomainError("Gamma subordinator needs positive shape and rate")
        if kind == SubordinatorKind.COMPOUND_POISSON:
            if not self.rate > 0:
                raise DomainError(f"Poisson rate must be positive, got {self.rate}")
            if self.jump_law is None:
                raise DomainError("Compound Poisson subordinator needs a jump law")
        if kind == SubordinatorKind.DRIFT_ONLY and not self.drift > 0:
            raise DomainError("Drift-only subordinator needs a positive drift")
        if self.declared_rv_index is not None:
            if abs(self.declared_rv_index - self.model_rv_index) > 1e-9:
                raise DomainError(
                    f"Declared index {self.declared_rv_index} disagrees with the "
                    f"model index {self.model_rv_index}"
                )

    # ------------------------------------------------------------------ constructors

    @classmethod
    def stable(cls, beta: float, scale: float = 1.0, drift: float = 0.0) -> "SubordinatorSpec":
        return cls(SubordinatorKind.STABLE, index=beta, scale=scale, drift=drift)

    @classmethod
    def gamma(cls, shape: float, rate: float, drift: float = 0.0) -> "SubordinatorSpec":
        return cls(SubordinatorKind.GAMMA, shape=shape, rate=rate, drift=drift)

    @classmethod
    def tempered_stable(
        cls, delta: float, tilt: float, scale: float = 1.0, drift: float = 0.0
    ) -> "SubordinatorSpec":
        return cls(SubordinatorKind.TEMPERED_STABLE, index=delta, tilt=tilt, scale=scale, drift=drift)

    @classmethod
    def compound_poisson(cls, rate: float, jump_law: JumpLaw, drift: float = 0.0) -> "SubordinatorSpec":
        return cls(SubordinatorKind.COMPOUND_POISSON, rate=rate, jump_law=jump_law, drift=drift)

    @classmethod
    def drift_only(cls, drift: float) -> "SubordinatorSpec":
        return cls(SubordinatorKind.DRIFT_ONLY, drift=drift)

    # ------------------------------------------------------------------ properties

    @property
    def model_rv_index(self) -> float:
        """Regular-variation index of phi at 0 implied by the model."""
        if self.kind == SubordinatorKind.STABLE:
            return self.index
        if self.kind == SubordinatorKind.TEMPERED_STABLE:
            return 1.0 if self.tilt > 0 else self.index
        if self.kind == SubordinatorKind.COMPOUND_POISSON:
            return self.jump_law.tail_index
        return 1.0

    @property
    def rv_index(self) -> float:
        return self.declared_rv_index if self.declared_rv_index is not None else self.model_rv_index

    @property
    def rv_index_at_infinity(self) -> float:
        """Regular-variation index of phi at infinity."""
        if self.drift > 0 or self.kind == SubordinatorKind.DRIFT_ONLY:
            return 1.0
        if self.kind in (SubordinatorKind.STABLE, SubordinatorKind.TEMPERED_STABLE):
            return self.index
        return 0.0

    @property
    def has_jumps_only_finitely(self) -> bool:
        """True when paths are exactly representable as jumps plus drift."""
        return self.kind in (SubordinatorKind.COMPOUND_POISSON, SubordinatorKind.DRIFT_ONLY)

    @property
    def is_theta_subordinator(self) -> bool:
        """Whether lambda/phi(lambda) is itself a Laplace exponent."""
        if self.theta_subordinator is not None:
            return self.theta_subordinator
        return self.kind == SubordinatorKind.STABLE and self.drift == 0

    @property
    def phi_supremum(self) -> float:
        if self.kind == SubordinatorKind.COMPOUND_POISSON and self.drift == 0:
            return self.rate
        return math.inf

    def mean(self) -> float:
        """E(xi_1) = phi'(0+), infinite when the declared index is below 1."""
        if self.rv_index < 1.0:
            return math.inf
        if self.kind == SubordinatorKind.GAMMA:
            base = self.shape / self.rate
        elif self.kind == SubordinatorKind.TEMPERED_STABLE:
            base = self.scale * self.index * self.tilt ** (self.index - 1.0)
        elif self.kind == SubordinatorKind.COMPOUND_POISSON:
            base = self.rate * self.jump_law.mean
        else:
            base = 0.0
        return self.drift + base

    # ------------------------------------------------------------------ Laplace exponent

    def phi(self, lam: ArrayLike) -> Union[float, np.ndarray]:
        """
        Evaluate the Laplace exponent.

        Args:
            lam: Non-negative argument (scalar or array)

        Returns:
            phi(lam), with the shape of the input

        Raises:
            DomainError: If any argument is negative
        """
        arr = np.asarray(lam, dtype=float)
        if np.any(arr < 0) or np.any(np.isnan(arr)):
            raise DomainError(f"Laplace exponent argument must be non-negative, got {lam}")

        kind = self.kind
        if kind == SubordinatorKind.STABLE:
            value = self.scale * np.power(arr, self.index)
        elif kind == SubordinatorKind.GAMMA:
            value = self.shape * np.log1p(arr / self.rate)
        elif kind == SubordinatorKind.TEMPERED_STABLE:
            if self.tilt > 0:
                # theta^delta ((1 + lambda/theta)^delta - 1) without cancellation
                value = self.scale * self.tilt ** self.index * np.expm1(
                    self.index * np.log1p(arr / self.tilt)
                )
            else:
                value = self.scale * np.power(arr, self.index)
        elif kind == SubordinatorKind.COMPOUND_POISSON:
            value = self.rate * self.jump_law.laplace_complement(arr)
        else:
            value = np.zeros_like(arr)

        value = value + self.drift * arr
        return float(value) if np.ndim(value) == 0 else value

    def phi_inverse(self, y: float) -> float:
        """
        Right-continuous generalized inverse inf{lambda >= 0 : phi(lambda) > y}.

        Bracketed by doubling, then solved with Brent's method to relative tolerance 1e-12.

        Raises:
            DomainError: If y is negative
            OutOfRangeError: If y is at or above sup phi
        """
        if y < 0 or math.isnan(y):
            raise DomainError(f"phi_inverse argument must be non-negative, got {y}")
        if y >= self.phi_supremum:
            raise OutOfRangeError(
                f"phi_inverse({y}) undefined: phi is bounded by {self.phi_supremum}"
            )
        if y == 0.0:
            return 0.0

        lo, hi = 0.0, 1.0
        steps = 0
        while self.phi(hi) <= y:
            lo, hi = hi, 2.0 * hi
            steps += 1
            if steps > 2000:
                raise NumericError(f"phi_inverse({y}) could not bracket the root", {"hi": hi})
        if lo == 0.0:
            while self.phi(hi / 2.0) > y:
                hi /= 2.0
                steps += 1
                if hi < 1e-300:
                    raise NumericError(f"phi_inverse({y}) underflowed", {"hi": hi})
            lo = hi / 2.0

        try:
            return float(
                optimize.brentq(
                    lambda lam: float(self.phi(lam)) - y,
                    lo,
                    hi,
                    xtol=1e-300,
                    rtol=_INVERSE_REL_TOL,
                    maxiter=_INVERSE_MAX_STEPS,
                )
            )
        except RuntimeError as e:
            raise NumericError(f"phi_inverse({y}) did not converge", {"lo": lo, "hi": hi, "reason": str(e)})

    def estimate_rv_index(self, grid: Sequence[float]) -> float:
        """
        Least-squares slope of log phi against log lambda on a grid decreasing to 0.

        Raises:
            UsageError: If the grid has fewer than 4 points or is not decreasing
        """
        lam = np.asarray(grid, dtype=float)
        if lam.size < 4:
            raise UsageError(f"Index estimation needs at least 4 grid points, got {lam.size}")
        if np.any(lam <= 0) or np.any(np.diff(lam) >= 0):
            raise UsageError("Index estimation grid must be positive and strictly decreasing")
        slope, _ = np.polyfit(np.log(lam), np.log(self.phi(lam)), 1)
        return float(slope)

    # ------------------------------------------------------------------ sampling

    def sample_increment(
        self, dt: float, rng: np.random.Generator, size: Optional[int] = None
    ) -> Union[float, np.ndarray]:
        """
        Draw xi_dt exactly (independent increments over a step of length dt).

        Args:
            dt: Positive time step
            rng: Random generator
            size: Number of independent draws (None for a scalar)

        Returns:
            Non-negative increment(s)
        """
        if not dt > 0:
            raise UsageError(f"Time step must be positive, got {dt}")
        n = 1 if size is None else size
        kind = self.kind

        if kind == SubordinatorKind.STABLE:
            jumps = (self.scale * dt) ** (1.0 / self.index) * positive_stable(self.index, rng, n)
        elif kind == SubordinatorKind.GAMMA:
            jumps = rng.gamma(self.shape * dt, 1.0 / self.rate, n)
        elif kind == SubordinatorKind.TEMPERED_STABLE:
            jumps = self._tempered_increment(dt, rng, n)
        elif kind == SubordinatorKind.COMPOUND_POISSON:
            counts = rng.poisson(self.rate * dt, n)
            sizes = self.jump_law.sample(rng, int(counts.sum()))
            owners = np.repeat(np.arange(n), counts)
            jumps = np.bincount(owners, weights=sizes, minlength=n)
        else:
            jumps = np.zeros(n)

        values = jumps + self.drift * dt
        return float(values[0]) if size is None else values

    def _tempered_increment(self, dt: float, rng: np.random.Generator, n: int) -> np.ndarray:
        # exponential tilting of a stable increment; the step is split so that the
        # acceptance probability exp(-dt c theta^delta) stays above e^-1
        pieces = max(1, math.ceil(dt * self.scale * self.tilt ** self.index))
        sub_dt = dt / pieces
        scale = (self.scale * sub_dt) ** (1.0 / self.index)
        total = np.zeros(n)
        for _ in range(pieces):
            out = np.empty(n)
            pending = np.arange(n)
            while pending.size:
                draws = scale * positive_stable(self.index, rng, pending.size)
                accept = rng.random(pending.size) < np.exp(-self.tilt * draws)
                out[pending[accept]] = draws[accept]
                pending = pending[~accept]
            total += out
        return total

    # ------------------------------------------------------------------ checks and documents

    def validate(self, grid: Optional[Sequence[float]] = None) -> None:
        """
        Check phi(0) = 0, monotonicity and concavity on a logarithmic grid.

        Raises:
            DomainError: If a check fails
        """
        lam = np.asarray(grid if grid is not None else np.logspace(-6, 6, 49), dtype=float)
        if self.phi(0.0) != 0.0:
            raise DomainError(f"phi(0) must be 0 for {self.kind.value}")
        values = np.asarray(self.phi(lam))
        steps = np.diff(values)
        if np.any(steps < -1e-12 * np.maximum(values[1:], 1.0)):
            raise DomainError(f"phi is not non-decreasing for {self.kind.value}")
        slopes = steps / np.diff(lam)
        if np.any(slopes[1:] > slopes[:-1] * (1.0 + 1e-6) + 1e-12):
            raise DomainError(f"phi is not concave for {self.kind.value}")

    def to_document(self) -> Dict[str, Any]:
        kind = self.kind
        doc: Dict[str, Any] = {"kind": kind.value}
        if kind == SubordinatorKind.STABLE:
            doc.update(beta=self.index, scale=self.scale)
        elif kind == SubordinatorKind.GAMMA:
            doc.update(shape=self.shape, rate=self.rate)
        elif kind == SubordinatorKind.TEMPERED_STABLE:
            doc.update(delta=self.index, tilt=self.tilt, scale=self.scale)
        elif kind == SubordinatorKind.COMPOUND_POISSON:
            doc.update(rate=self.rate, jump_law=self.jump_law.to_document())
        doc["drift"] = self.drift
        if self.declared_rv_index is not None:
            doc["declared_rv_index"] = self.declared_rv_index
        if self.theta_subordinator is not None:
            doc["theta_subordinator"] = self.theta_subordinator
        return doc

    @classmethod
    def from_document(cls, doc: Dict[str, Any]) -> "SubordinatorSpec":
        """
        Build and validate a spec from its document form.

        Raises:
            ConfigError: If the document does not match the subordinator_spec schema
            DomainError: If phi fails the grid checks or the declared index disagrees
        """
        validate_document(doc, "subordinator_spec", "spec")
        kind = SubordinatorKind(doc["kind"])

        kwargs: Dict[str, Any] = {"drift": float(doc.get("drift", 0.0))}
        if "declared_rv_index" in doc:
            kwargs["declared_rv_index"] = float(doc["declared_rv_index"])
        if "theta_subordinator" in doc:
            kwargs["theta_subordinator"] = doc["theta_subordinator"]
        if kind == SubordinatorKind.STABLE:
            kwargs.update(index=float(doc["beta"]), scale=float(doc.get("scale", 1.0)))
        elif kind == SubordinatorKind.GAMMA:
            kwargs.update(shape=float(doc["shape"]), rate=float(doc["rate"]))
        elif kind == SubordinatorKind.TEMPERED_STABLE:
            kwargs.update(
                index=float(doc["delta"]),
                tilt=float(doc["tilt"]),
                scale=float(doc.get("scale", 1.0)),
            )
        elif kind == SubordinatorKind.COMPOUND_POISSON:
            kwargs.update(
                rate=float(doc["rate"]),
                jump_law=JumpLaw.from_document(doc["jump_law"]),
            )

        spec = cls(kind, **kwargs)
        spec.validate()
        logger.debug(f"Loaded subordinator spec {spec.to_document()}")
        return spec
