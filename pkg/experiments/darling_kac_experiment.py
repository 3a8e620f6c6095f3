"""
Darling-Kac Experiment

Moments of phi(1 / log T) times the integral of X_s^-alpha over [0, T] against the
scaled Mittag-Leffler law.
"""
import numpy as np

from experiments.base_experiment import BaseExperiment, pssmp_to_log_time, replicate_stream
from pssmp_limits.errors import DomainError
from pssmp_limits.limit_laws import ml_moment, ml_sampler
from pssmp_limits.mc_stats import ks_two_sample, moment_estimate
from pssmp_limits.subordinator_models import SubordinatorSpec


def clock_at_log_time(
    index: int, master_seed: int, spec: SubordinatorSpec, alpha: float, log_t: float, step: float
) -> float:
    """tau(T) = integral of X_s^-alpha over [0, T] for X started at 1."""
    rng = replicate_stream(master_seed, index)
    x_path = pssmp_to_log_time(spec, alpha, log_t, rng, step)
    tau, _ = x_path.clock.tau_log(log_t)
    return float(tau)


class DarlingKacExperiment(BaseExperiment):
    """Normalized occupation clock against alpha^-beta times a Mittag-Leffler variable."""

    name = "darling-kac"
    PARAMETERS = {
        "log_t": (float,),
        "n_paths": (int,),
        "step": (float,),
        "moments": (list,),
        "tolerance": (float,),
        "ml_samples": (int,),
    }

    def execute(self) -> None:
        beta = self.spec.rv_index
        if not 0.0 < beta <= 1.0:
            raise DomainError(f"Darling-Kac scaling needs an index in (0, 1], got {beta}")
        log_t = self.param("log_t")
        n = self.param("n_paths")

        taus = np.array(self.map_replicates(
            clock_at_log_time, n, spec=self.spec, alpha=self.alpha, log_t=log_t, step=self.param("step")
        ))
        normalized = float(self.spec.phi(1.0 / log_t)) * taus
        scale = self.alpha ** (-beta)

        for order in (int(k) for k in self.param("moments")):
            target = scale ** order * ml_moment(beta, order)
            estimate = moment_estimate(normalized, order)
            rel_error = abs(estimate.value - target) / target
            self.add_report_entry(
                f"moment_{order}",
                theoretical=target,
                empirical=estimate.value,
                uncertainty={"stderr": estimate.stderr, "relative_error": rel_error},
            )
            self.add_check(f"moment_{order}", rel_error <= self.param("tolerance"))

        if self.param("ml_samples") > 0 and beta < 1.0:
            reference = scale * ml_sampler(beta, self.seed_plan.stream(n, 1), self.param("ml_samples"))
            statistic, critical = ks_two_sample(normalized, reference)
            self.add_report_entry(
                "ks_vs_mittag_leffler", uncertainty={"ks": statistic, "critical_1pct": critical}
            )

        self.add_report_entry("log_t", theoretical=log_t, empirical={"mean_log_tau": float(np.mean(np.log(taus)))})
        self.rows = [
            {"path": i, "tau": float(t), "normalized": float(v)}
            for i, (t, v) in enumerate(zip(taus, normalized))
        ]
        self.logger.info(f"Normalized clock mean {np.mean(normalized):.4f} (limit {scale * ml_moment(beta, 1):.4f})")
