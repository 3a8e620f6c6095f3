"""
Exponential Functional Experiment

Monte Carlo moments of I against n! / prod phi(alpha k), the factorization
identity with R_phi, the stationary law mu seen from zero, and the left-tail
harmonic statistic against its small-s asymptotic.
"""
import math
from typing import List, Tuple

import numpy as np

from experiments.base_experiment import BaseExperiment, replicate_stream
from pssmp_limits.errors import PreconditionError
from pssmp_limits.exp_functional import (
    ExpFunctionalSampler,
    TailTarget,
    entrance_negative_moment,
    harmonic_tail_statistic,
    i_moment,
    left_tail_asymptotic,
    mu_functional,
    r_phi_moment,
)
from pssmp_limits.mc_stats import moment_estimate
from pssmp_limits.subordinator_models import SubordinatorSpec

CHUNK_SIZE = 4096
_MU_PURPOSE = 1


def exp_functional_chunk(
    index: int,
    master_seed: int,
    spec: SubordinatorSpec,
    alpha: float,
    eps: float,
    step: float,
    total: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """Samples of I for chunk index; chunk sizes depend only on total."""
    size = min(CHUNK_SIZE, total - index * CHUNK_SIZE)
    rng = replicate_stream(master_seed, index)
    samples = ExpFunctionalSampler(spec, alpha, eps, step).sample(size, rng)
    return samples.values, samples.tail_bounds


class ExpFunctionalExperiment(BaseExperiment):
    """Moments, identities and tails of the exponential functional."""

    name = "expfun"
    PARAMETERS = {
        "n_samples": (int,),
        "eps": (float,),
        "step": (float,),
        "moments": (list,),
        "tolerance": (float,),
        "product_orders": (int,),
        "mu_samples": (int,),
        "tail_log_inv_s": (list,),
    }

    def execute(self) -> None:
        n = self.param("n_samples")
        chunks = self.map_replicates(
            exp_functional_chunk,
            int(math.ceil(n / CHUNK_SIZE)),
            spec=self.spec,
            alpha=self.alpha,
            eps=self.param("eps"),
            step=self.param("step"),
            total=n,
        )
        values = np.concatenate([c[0] for c in chunks])
        bounds = np.concatenate([c[1] for c in chunks])
        self.add_report_entry("truncation", theoretical=self.param("eps"), empirical=float(bounds.max()))

        self._moments(values)
        self._factorization()
        self._stationary_law()
        self._left_tails(values)
        self.rows = [{"sample": i, "I": float(v), "tail_bound": float(b)} for i, (v, b) in enumerate(zip(values, bounds))]

    def _moments(self, values: np.ndarray) -> None:
        for order in (int(k) for k in self.param("moments")):
            target = i_moment(self.spec, self.alpha, order)
            estimate = moment_estimate(values, order)
            rel_error = abs(estimate.value - target) / target
            self.add_report_entry(
                f"I_moment_{order}",
                theoretical=target,
                empirical=estimate.value,
                uncertainty={"stderr": estimate.stderr, "relative_error": rel_error},
            )
            self.add_check(f"I_moment_{order}", rel_error <= self.param("tolerance"))

    def _factorization(self) -> None:
        worst = 0.0
        for order in range(1, self.param("product_orders") + 1):
            product = r_phi_moment(self.spec, self.alpha, order) * i_moment(self.spec, self.alpha, order)
            worst = max(worst, abs(product - math.factorial(order)) / math.factorial(order))
        self.add_report_entry("R_times_I_relative_error", theoretical=0.0, empirical=worst)
        self.add_check("factorization", worst <= 1e-12)

    def _stationary_law(self) -> None:
        count = self.param("mu_samples")
        if count < 2 or not math.isfinite(self.spec.mean()):
            self.add_report_entry("mu", theoretical="undefined: infinite mean")
            return
        eps, step = self.param("eps"), self.param("step")
        total = mu_functional(
            self.spec, self.alpha, np.ones_like, count, self.seed_plan.stream(0, _MU_PURPOSE), eps, step
        )
        second = mu_functional(
            self.spec,
            self.alpha,
            lambda x: np.power(x, -2.0 * self.alpha),
            count,
            self.seed_plan.stream(1, _MU_PURPOSE),
            eps,
            step,
        )
        target = entrance_negative_moment(self.spec, self.alpha, 2)
        self.add_report_entry("mu_total_mass", theoretical=1.0, empirical=total.value, uncertainty=total.stderr)
        self.add_report_entry(
            "mu_x_minus_2alpha", theoretical=target, empirical=second.value, uncertainty=second.stderr
        )
        self.add_check("mu_total_mass", abs(total.value - 1.0) <= 4.0 * total.stderr + 1e-3)
        self.add_check("mu_x_minus_2alpha", abs(second.value - target) <= 4.0 * second.stderr + 1e-3 * target)

    def _left_tails(self, values: np.ndarray) -> None:
        log_inv = sorted(float(x) for x in self.param("tail_log_inv_s"))
        if not log_inv:
            return
        try:
            r_phi = [left_tail_asymptotic(self.spec, self.alpha, math.exp(-L), TailTarget.R_PHI) for L in log_inv]
        except PreconditionError as e:
            self.add_report_entry("left_tail", theoretical=f"not applicable: {str(e)}")
            return
        self.add_report_entry(
            "R_phi_harmonic_asymptotic", theoretical={f"{L:g}": a.harmonic for L, a in zip(log_inv, r_phi)}
        )
        if not self.spec.is_theta_subordinator:
            return

        asymptotic: List[float] = []
        empirical: List[float] = []
        for L in log_inv:
            s = math.exp(-L)
            asymptotic.append(left_tail_asymptotic(self.spec, self.alpha, s, TailTarget.I_PHI).harmonic)
            empirical.append(harmonic_tail_statistic(values, s))
        log_ratio = [math.log(e / a) for e, a in zip(empirical, asymptotic)]
        self.add_report_entry(
            "I_phi_harmonic",
            theoretical={f"{L:g}": a for L, a in zip(log_inv, asymptotic)},
            empirical={f"{L:g}": e for L, e in zip(log_inv, empirical)},
            uncertainty={
                "log_ratio": log_ratio,
                "monotone": bool(np.all(np.diff(np.abs(log_ratio)) <= 0.0)),
            },
        )
