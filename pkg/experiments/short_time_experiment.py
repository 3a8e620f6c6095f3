"""
Short-Time Experiment

Compares h(t) log X(t) for a pssMp started at 1 with directly simulated
h(t) xi_t, h = phi_inverse(1/t), at a small time t.
"""
import math

import numpy as np

from experiments.base_experiment import BaseExperiment, replicate_stream
from pssmp_limits.lamperti import short_time_samples
from pssmp_limits.mc_stats import ks_two_sample
from pssmp_limits.subordinator_models import SubordinatorSpec

CHUNK_SIZE = 1024
_DIRECT_PURPOSE = 1


def short_time_chunk(
    index: int, master_seed: int, spec: SubordinatorSpec, alpha: float, t: float, steps: int, total: int
) -> np.ndarray:
    size = min(CHUNK_SIZE, total - index * CHUNK_SIZE)
    rng = replicate_stream(master_seed, index)
    return short_time_samples(spec, alpha, t, size, rng, steps)


class ShortTimeExperiment(BaseExperiment):
    """Stable-type limit of log X at small times."""

    name = "short-time"
    PARAMETERS = {
        "t": (float,),
        "n_samples": (int,),
        "steps": (int,),
        "ks_tolerance": (float,),
    }

    def execute(self) -> None:
        t, n = self.param("t"), self.param("n_samples")
        pssmp = np.concatenate(self.map_replicates(
            short_time_chunk,
            int(math.ceil(n / CHUNK_SIZE)),
            spec=self.spec,
            alpha=self.alpha,
            t=t,
            steps=self.param("steps"),
            total=n,
        ))
        h = self.spec.phi_inverse(1.0 / t)
        direct = h * np.asarray(
            self.spec.sample_increment(t, self.seed_plan.stream(0, _DIRECT_PURPOSE), n), dtype=float
        )
        statistic, critical = ks_two_sample(pssmp, direct)

        self.add_report_entry("h", theoretical=h)
        self.add_report_entry(
            "median",
            empirical={"pssmp": float(np.median(pssmp)), "direct": float(np.median(direct))},
            uncertainty={"ks": statistic, "critical_1pct": critical},
        )
        self.add_check("short_time_ks", statistic <= self.param("ks_tolerance"))
        self.rows = [
            {"sample": i, "h_log_x": float(a), "h_xi": float(b)}
            for i, (a, b) in enumerate(zip(pssmp, direct))
        ]
