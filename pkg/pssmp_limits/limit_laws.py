"""
Limit Laws

Closed-form laws that appear as limits of increasing pssMps started near zero:
the law of V (logarithmic growth fluctuations), the Mittag-Leffler law (Darling-Kac
normalization of the clock), the generalized arcsine law of (age, residual life),
the lower-envelope growth function g with its constant, and a numerical
classifier for the integral test that decides upper envelopes.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy import integrate, special

from pssmp_limits.errors import (
    DegenerateLawError,
    DomainError,
    PreconditionError,
    UsageError,
)
from pssmp_limits.schemas import validate_document
from pssmp_limits.subordinator_models import SubordinatorSpec, positive_stable

logger = logging.getLogger(__name__)

E_E = math.exp(math.e)


# ---------------------------------------------------------------------------- V law


def _check_v_params(alpha: float, beta: float) -> None:
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if beta <= 0.0:
        raise DegenerateLawError("V = +infinity almost surely when beta = 0", flag="V=inf")
    if beta >= 1.0:
        raise DegenerateLawError("V = 0 almost surely when beta = 1", flag="V=0")


def v_density(alpha: float, beta: float, v: Union[float, np.ndarray]) -> np.ndarray:
    """
    Density of V = 2U / (alpha (1 - U)), U ~ Beta(1 - beta, beta).

    alpha^(1-beta) 2^beta sin(beta pi)/pi * v^-beta / (2 + alpha v) on v > 0.
    """
    _check_v_params(alpha, beta)
    v = np.asarray(v, dtype=float)
    const = alpha ** (1.0 - beta) * 2.0 ** beta * math.sin(beta * math.pi) / math.pi
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = const * np.power(v, -beta) / (2.0 + alpha * v)
    dens = np.where(v > 0, dens, np.where(v == 0, np.inf, 0.0))
    return float(dens) if dens.ndim == 0 else dens


def v_cdf(alpha: float, beta: float, v: Union[float, np.ndarray]) -> np.ndarray:
    """P(V <= v) = I_x(1 - beta, beta) with x = alpha v / (2 + alpha v)."""
    _check_v_params(alpha, beta)
    v = np.asarray(v, dtype=float)
    with np.errstate(invalid="ignore"):
        x = np.where(np.isinf(v), 1.0, alpha * v / (2.0 + alpha * v))
    cdf = np.where(v > 0, special.betainc(1.0 - beta, beta, np.clip(x, 0.0, 1.0)), 0.0)
    return float(cdf) if cdf.ndim == 0 else cdf


def v_from_u(u: Union[float, np.ndarray], alpha: float) -> np.ndarray:
    """Pathwise transform 2U / (alpha (1 - U))."""
    u = np.asarray(u, dtype=float)
    return 2.0 * u / (alpha * (1.0 - u))


def v_sampler(alpha: float, beta: float, rng: np.random.Generator, size: int) -> np.ndarray:
    """Finite samples of V; Beta draws that round to 1 are redrawn."""
    _check_v_params(alpha, beta)
    u = rng.beta(1.0 - beta, beta, size)
    bad = u >= 1.0
    while np.any(bad):
        u[bad] = rng.beta(1.0 - beta, beta, int(bad.sum()))
        bad = u >= 1.0
    return v_from_u(u, alpha)


# ---------------------------------------------------------------------------- Mittag-Leffler


def ml_moment(beta: float, n: int) -> float:
    """n-th moment n! / Gamma(1 + n beta) of the Mittag-Leffler law of index beta."""
    if not 0.0 <= beta <= 1.0:
        raise DomainError(f"Mittag-Leffler index must lie in [0, 1], got {beta}")
    if n < 0:
        raise DomainError(f"Moment order must be non-negative, got {n}")
    return math.exp(special.gammaln(n + 1.0) - special.gammaln(1.0 + n * beta))


def ml_sampler(beta: float, rng: np.random.Generator, size: int) -> np.ndarray:
    """
    Mittag-Leffler samples S^-beta, S positive stable with Laplace exp(-lambda^beta).

    Raises:
        DegenerateLawError: For beta = 0, where the law is Exponential(1)
    """
    if beta == 0.0:
        raise DegenerateLawError(
            "Mittag-Leffler index 0 is the Exponential(1) law; sample it directly",
            flag="exponential",
        )
    if not 0.0 < beta <= 1.0:
        raise DomainError(f"Mittag-Leffler index must lie in (0, 1], got {beta}")
    if beta == 1.0:
        return np.ones(size)
    return np.power(positive_stable(beta, rng, size), -beta)


# ---------------------------------------------------------------------------- (age, residual)


@dataclass(frozen=True)
class DynkinLamperti:
    """Generalized arcsine law of the limit of (A_b/b, R_b/b)."""

    beta: float

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise DomainError(f"Arcsine index must lie in (0, 1), got {self.beta}")

    @property
    def _const(self) -> float:
        return math.sin(self.beta * math.pi) / math.pi

    def density(self, u: Union[float, np.ndarray], w: Union[float, np.ndarray]) -> np.ndarray:
        """beta sin(beta pi)/pi (1 - u)^(beta - 1) (u + w)^(-1 - beta) on (0,1) x (0,inf)."""
        u = np.asarray(u, dtype=float)
        w = np.asarray(w, dtype=float)
        inside = (u > 0) & (u < 1) & (w > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            dens = (
                self.beta * self._const
                * np.power(1.0 - u, self.beta - 1.0) * np.power(u + w, -1.0 - self.beta)
            )
        dens = np.where(inside, dens, 0.0)
        return float(dens) if dens.ndim == 0 else dens

    def marginal_u_density(self, u: Union[float, np.ndarray]) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            dens = self._const * np.power(u, -self.beta) * np.power(1.0 - u, self.beta - 1.0)
        return np.where((u > 0) & (u < 1), dens, 0.0)

    def sample(self, rng: np.random.Generator, size: int) -> Tuple[np.ndarray, np.ndarray]:
        """U ~ Beta(1 - beta, beta) and O | U = u with P(O > w) = (u / (u + w))^beta."""
        u = rng.beta(1.0 - self.beta, self.beta, size)
        o = u * (np.power(1.0 - rng.random(size), -1.0 / self.beta) - 1.0)
        return u, o

    def cell_probability(self, u_lo: float, u_hi: float, w_lo: float, w_hi: float) -> float:
        """Probability of [u_lo, u_hi] x [w_lo, w_hi] (w_hi may be infinite)."""
        beta = self.beta

        def conditional(u: float) -> float:
            upper = 1.0 if w_lo == 0.0 else (u / (u + w_lo)) ** beta
            lower = 0.0 if math.isinf(w_hi) else (u / (u + w_hi)) ** beta
            return upper - lower

        # endpoint singularities of the marginal go into the quadrature weight
        wa = -beta if u_lo == 0.0 else 0.0
        wb = beta - 1.0 if u_hi == 1.0 else 0.0

        def integrand(u: float) -> float:
            smooth = (u ** -beta if wa == 0.0 else 1.0) * ((1.0 - u) ** (beta - 1.0) if wb == 0.0 else 1.0)
            return self._const * smooth * conditional(u)

        value, _ = integrate.quad(integrand, u_lo, u_hi, weight="alg", wvar=(wa, wb), limit=200)
        return float(value)


# ---------------------------------------------------------------------------- envelopes


def lil_constant(beta: float) -> float:
    """c_beta = beta (1 - beta)^((1 - beta)/beta)."""
    if not 0.0 < beta < 1.0:
        raise DomainError(f"Index must lie in (0, 1), got {beta}")
    return beta * (1.0 - beta) ** ((1.0 - beta) / beta)


def growth_g(spec: SubordinatorSpec, t: float) -> float:
    """g(t) = log log t / phi_inverse(log log t / t) for t > e^e."""
    if not t > E_E:
        raise DomainError(f"Growth function needs t > e^e, got {t}")
    loglog = math.log(math.log(t))
    return loglog / spec.phi_inverse(loglog / t)


@dataclass(frozen=True)
class GrowthDescriptor:
    """Increasing function f(x) = x^exponent (log x)^log_power, evaluated in log space."""

    exponent: float
    log_power: float = 0.0

    def __post_init__(self):
        if self.exponent < 0 or (self.exponent == 0 and self.log_power <= 0):
            raise UsageError(f"Growth descriptor {self.label} is not increasing")

    @property
    def label(self) -> str:
        text = f"t^{self.exponent:g}"
        return text + (f" (log t)^{self.log_power:g}" if self.log_power else "")

    def log_value(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.exponent * np.log(x) + self.log_power * np.log(np.log(x))

    def __call__(self, x):
        return np.exp(self.log_value(x))

    def to_document(self) -> Dict[str, Any]:
        return {"exponent": self.exponent, "log_power": self.log_power}

    @classmethod
    def from_document(cls, doc: Dict[str, Any]) -> "GrowthDescriptor":
        validate_document(doc, "growth_descriptor", "growth descriptor")
        return cls(float(doc["exponent"]), float(doc.get("log_power", 0.0)))


class Verdict(str, Enum):
    CONVERGES = "converges"
    DIVERGES = "diverges"
    INCONCLUSIVE = "inconclusive"


@dataclass
class IntegralTestResult:
    verdict: Verdict
    schedule: np.ndarray
    partial_integrals: np.ndarray
    exponents: np.ndarray
    positive_increase: float
    trace: List[Dict[str, float]] = field(default_factory=list)


class IntegralTestClassifier:
    """
    Decide convergence of the integral of phi(1 / f(g(t))) at infinity.

    The integral is accumulated over doubling blocks [t0 2^k, t0 2^(k+1)] with
    Gauss-Legendre nodes in log t; the local decay exponent p of the integrand is
    read from ratios of consecutive block integrals.
    """

    def __init__(
        self,
        t0: float = 2.0 ** 8,
        doublings: int = 40,
        nodes: int = 32,
        window: int = 5,
        margin: float = 0.05,
    ):
        if not t0 > E_E:
            raise DomainError(f"Integral test schedule must start beyond e^e, got {t0}")
        if doublings < window + 2:
            raise UsageError(f"Integral test needs more than {window + 1} doublings")
        self.logger = logging.getLogger(__name__)
        self.t0 = t0
        self.doublings = doublings
        self.window = window
        self.margin = margin
        self.nodes, self.weights = np.polynomial.legendre.leggauss(nodes)

    def classify(
        self, spec: SubordinatorSpec, f: Union[GrowthDescriptor, Callable[[np.ndarray], np.ndarray]]
    ) -> IntegralTestResult:
        schedule = self.t0 * np.power(2.0, np.arange(self.doublings + 1))
        g_nodes = np.array([growth_g(spec, t) for t in schedule])
        log_f = self._log_f(f, g_nodes)
        if np.any(np.diff(log_f) <= 0):
            raise UsageError("Integral test function must be increasing")

        ratios = np.exp(log_f[:-1] - self._log_f(f, 2.0 * g_nodes[:-1]))
        positive_increase = float(np.min(ratios))
        if not positive_increase > 0:
            raise PreconditionError("Integral test function must have positive increase")

        blocks = np.array([self._block_integral(spec, f, lo) for lo in schedule[:-1]])
        if np.any(blocks <= 0):
            raise UsageError("Integral test integrand vanished on the schedule")
        partial = np.cumsum(blocks)
        exponents = np.log2(blocks[1:] / blocks[:-1]) - 1.0

        tail = exponents[-self.window:]
        if np.all(tail < -1.0 - self.margin):
            verdict = Verdict.CONVERGES
        elif np.all(tail > -1.0 + self.margin):
            verdict = Verdict.DIVERGES
        else:
            verdict = Verdict.INCONCLUSIVE
        self.logger.info(f"Integral test verdict {verdict.value}, final local exponent {tail[-1]:.4f}")

        trace = [
            {"t": float(t), "partial_integral": float(p), "exponent": float(e)}
            for t, p, e in zip(schedule[2:], partial[1:], exponents)
        ]
        return IntegralTestResult(verdict, schedule, partial, exponents, positive_increase, trace)

    @staticmethod
    def _log_f(f, x: np.ndarray) -> np.ndarray:
        if isinstance(f, GrowthDescriptor):
            return f.log_value(x)
        return np.log(np.asarray(f(x), dtype=float))

    def _block_integral(self, spec: SubordinatorSpec, f, lo: float) -> float:
        a, b = math.log(lo), math.log(2.0 * lo)
        u = 0.5 * (b - a) * self.nodes + 0.5 * (a + b)
        t = np.exp(u)
        g = np.array([growth_g(spec, x) for x in t])
        integrand = np.asarray(spec.phi(np.exp(-self._log_f(f, g)))) * t
        return float(0.5 * (b - a) * np.dot(self.weights, integrand))


def integral_test(
    spec: SubordinatorSpec,
    f: Union[GrowthDescriptor, Callable[[np.ndarray], np.ndarray]],
    t0: float = 2.0 ** 8,
    doublings: int = 40,
) -> IntegralTestResult:
    """Module-level entry point for IntegralTestClassifier."""
    return IntegralTestClassifier(t0=t0, doublings=doublings).classify(spec, f)


def limit_v_flag(beta: float) -> Optional[str]:
    """Degeneracy flag of the V law for a boundary index, None inside (0, 1)."""
    if beta <= 0.0:
        return "V=inf"
    if beta >= 1.0:
        return "V=0"
    return None
