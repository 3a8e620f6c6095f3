"""
Ergodic Experiment

Logarithmic-time averages of f(s^(-1/alpha) X(s)) against the stationary law mu
when E(xi_1) is finite, and their decay when it is not.
"""
import math
from typing import Any, Dict, List

import numpy as np

from experiments.base_experiment import BaseExperiment, pssmp_to_log_time, replicate_stream
from pssmp_limits.exp_functional import entrance_negative_moment
from pssmp_limits.lamperti import ergodic_average
from pssmp_limits.subordinator_models import SubordinatorSpec

FUNCTIONS = ("one", "inverse_power")


def _integrand(name: str, alpha: float):
    if name == "one":
        return np.ones_like
    return lambda x: np.power(x, -alpha)


def ergodic_replicate(
    index: int,
    master_seed: int,
    spec: SubordinatorSpec,
    alpha: float,
    step: float,
    function: str,
    log_times: List[float],
    t_start: float,
    nodes_per_decade: int,
) -> List[float]:
    """Averages up to each log time along one path."""
    rng = replicate_stream(master_seed, index)
    x_path = pssmp_to_log_time(spec, alpha, max(log_times), rng, step)
    f = _integrand(function, alpha)
    return [ergodic_average(x_path, f, math.exp(lt), t_start, nodes_per_decade) for lt in log_times]


def path_spread(averages: np.ndarray, log_times: List[float]) -> Dict[str, Dict[str, Any]]:
    """
    Spread of the per-path averages at each log time.

    Args:
        averages: One row per replicate, one column per log time
        log_times: Log times of the columns

    Returns:
        Minimum, maximum and standard deviation across paths, keyed like the report
    """
    spread = {}
    for lt, column in zip(log_times, averages.T):
        spread[f"log_t={lt:g}"] = {
            "min": float(column.min()),
            "max": float(column.max()),
            "std": float(column.std(ddof=1)) if column.size > 1 else 0.0,
        }
    return spread


class ErgodicExperiment(BaseExperiment):
    """Ergodic averages of the rescaled pssMp."""

    name = "ergodic"
    PARAMETERS = {
        "log_t": (list,),
        "replicates": (int,),
        "step": (float,),
        "function": {"enum": list(FUNCTIONS)},
        "tolerance": (float,),
        "t_start": (float,),
        "nodes_per_decade": (int,),
        "comparison_bound": (float,),
        "path_tolerance": (float,),
    }

    def execute(self) -> None:
        log_times = sorted(float(x) for x in self.param("log_t"))
        function = self.param("function")
        averages = np.array(self.map_replicates(
            ergodic_replicate,
            self.param("replicates"),
            spec=self.spec,
            alpha=self.alpha,
            step=self.param("step"),
            function=function,
            log_times=log_times,
            t_start=self.param("t_start"),
            nodes_per_decade=self.param("nodes_per_decade"),
        ))
        means = averages.mean(axis=0)
        stderr = averages.std(axis=0, ddof=1) / math.sqrt(averages.shape[0]) if averages.shape[0] > 1 else np.zeros_like(means)
        by_time = {f"log_t={lt:g}": float(m) for lt, m in zip(log_times, means)}
        final = float(means[-1])
        self.add_report_entry(f"per-path spread of mu({function})", empirical=path_spread(averages, log_times))

        if math.isfinite(self.spec.mean()):
            target = 1.0 if function == "one" else entrance_negative_moment(self.spec, self.alpha, 1)
            self.add_report_entry(
                f"mu({function})", theoretical=target, empirical=by_time, uncertainty=float(stderr[-1])
            )
            self.add_check("ergodic_limit", abs(final - target) <= self.param("tolerance") * target)
            worst = float(np.max(np.abs(averages[:, -1] - target))) / target
            self.add_report_entry("worst relative path deviation", empirical=worst)
            self.add_check("every_path", worst <= self.param("path_tolerance"))
        else:
            self.logger.info(f"Infinite mean: averages {by_time} should decay")
            self.add_report_entry(
                f"mu({function})",
                theoretical="0 (infinite mean)",
                empirical=by_time,
                uncertainty=float(stderr[-1]),
            )
            self.add_check("decreasing", bool(np.all(np.diff(means) < 0.0)))
            self.add_check("below_comparison", final < self.param("comparison_bound"))

        self.rows = [
            {"replicate": i, **{f"log_t_{lt:g}": float(v) for lt, v in zip(log_times, row)}}
            for i, row in enumerate(averages)
        ]
