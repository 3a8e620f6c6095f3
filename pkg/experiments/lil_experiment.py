"""
Iterated Logarithm Experiment

Running minimum and trailing tail infima of log X(t) / log t along doubling
times, the lower envelope of the subordinator itself against c_beta g(t), and the
diagnostic showing that no power of t captures X(t) up to bounded factors.
"""
import math
from typing import Any, Dict, List, Sequence

import numpy as np

from experiments.base_experiment import BaseExperiment, pssmp_to_log_time, replicate_stream
from pssmp_limits.limit_laws import growth_g, lil_constant
from pssmp_limits.path_engine import PathSimulator, doubling_schedule, running_ratio_stats, tail_infima
from pssmp_limits.subordinator_models import SubordinatorSpec

_XI_PURPOSE = 1
_TRAILING = 5


def lil_replicate(
    index: int,
    master_seed: int,
    spec: SubordinatorSpec,
    alpha: float,
    step: float,
    log_times: List[float],
    diag_exponents: List[float],
    diag_log_t: List[float],
    diag_k: float,
    xi_times: List[float],
) -> Dict[str, Any]:
    """Ratio trace, envelope indicators and the xi lower-envelope ratio of one path."""
    rng = replicate_stream(master_seed, index)
    log_t = np.asarray(log_times, dtype=float)
    horizon = max([float(log_t.max())] + list(diag_log_t))
    x_path = pssmp_to_log_time(spec, alpha, horizon, rng, step)

    trace = running_ratio_stats(x_path.log_value_log_time(log_t), lambda lt: lt, log_t)
    diag_lt = np.asarray(diag_log_t, dtype=float)
    log_x = x_path.log_value_log_time(diag_lt)
    inside = [(np.abs(log_x - a * diag_lt) <= diag_k).tolist() for a in diag_exponents]

    result: Dict[str, Any] = {
        "ratios": trace.ratios,
        "running_min": trace.running_min,
        "inside": inside,
        "xi_min": math.nan,
    }
    if xi_times:
        xi_rng = replicate_stream(master_seed, index, _XI_PURPOSE)
        values = PathSimulator().sample_skeleton(spec, xi_times, xi_rng)
        xi_trace = running_ratio_stats(values, lambda t: growth_g(spec, t), xi_times)
        result["xi_min"] = float(xi_trace.running_min[-1])
    return result


def settled_paths(ratios: np.ndarray, band: Sequence[float], count: int, tolerance: float) -> np.ndarray:
    """
    Paths whose tail infimum of log X(t) / log t has settled inside the band.

    A path qualifies when the infimum of its ratios from each of the last `count`
    doubling times onward lies in the band and these infima differ by at most
    `tolerance`.

    Args:
        ratios: One row of raw ratios per path
        band: Closed interval [lo, hi]
        count: Number of trailing doubling times
        tolerance: Allowed spread of the trailing infima

    Returns:
        Boolean flag per path
    """
    lo, hi = (float(x) for x in band)
    infima = tail_infima(np.atleast_2d(ratios), count)
    inside = np.all((infima >= lo) & (infima <= hi), axis=1)
    spread = infima.max(axis=1) - infima.min(axis=1)
    return inside & (spread <= tolerance)


class LilExperiment(BaseExperiment):
    """Lower envelope of log X(t) / log t and of the subordinator."""

    name = "lil"
    PARAMETERS = {
        "log_t0": (float,),
        "log_t_max": (float,),
        "replicates": (int,),
        "step": (float,),
        "band": (list,),
        "min_in_band": (int,),
        "min_settled": (int,),
        "settle_tolerance": (float,),
        "diag_log_t": (list,),
        "diag_k": (float,),
        "xi_doublings": (list,),
    }

    def execute(self) -> None:
        log_t0, log_t_max = self.param("log_t0"), self.param("log_t_max")
        doublings = int(math.floor((log_t_max - log_t0) / math.log(2.0)))
        log_times = (log_t0 + math.log(2.0) * np.arange(doublings + 1)).tolist()
        exponents = [1.0 / self.alpha + d for d in (0.0, 0.5, 1.0)]
        diag_log_t = sorted(float(x) for x in self.param("diag_log_t"))

        beta = self.spec.rv_index
        xi_times: List[float] = []
        if 0.0 < beta < 1.0 and self.param("xi_doublings"):
            k_lo, k_hi = (int(k) for k in self.param("xi_doublings"))
            xi_times = doubling_schedule(2.0 ** k_lo, k_hi - k_lo).tolist()

        results = self.map_replicates(
            lil_replicate,
            self.param("replicates"),
            spec=self.spec,
            alpha=self.alpha,
            step=self.param("step"),
            log_times=log_times,
            diag_exponents=exponents,
            diag_log_t=diag_log_t,
            diag_k=self.param("diag_k"),
            xi_times=xi_times,
        )
        self._running_min(log_times, results)
        self._power_diagnostic(exponents, diag_log_t, results)
        if xi_times:
            xi_min = np.array([r["xi_min"] for r in results])
            self.add_report_entry(
                "xi_liminf_over_g",
                theoretical=lil_constant(beta),
                empirical={"median": float(np.median(xi_min)), "per_seed": xi_min.tolist()},
            )

    def _running_min(self, log_times: List[float], results: List[Dict[str, Any]]) -> None:
        mins = np.array([r["running_min"] for r in results])
        ratios = np.array([r["ratios"] for r in results])
        final = mins[:, -1]
        band = self.param("band")
        lo, hi = (float(x) for x in band)
        in_band = int(np.sum((final >= lo) & (final <= hi)))
        count = min(_TRAILING, ratios.shape[1])
        settled = int(np.sum(settled_paths(ratios, band, count, self.param("settle_tolerance"))))

        self.add_report_entry(
            "liminf_log_x_over_log_t",
            theoretical=1.0 / self.alpha,
            empirical={
                "final_running_min": final.tolist(),
                "in_band": in_band,
                f"tail_infima_last_{count}": tail_infima(ratios, count).tolist(),
                "settled": settled,
            },
        )
        self.add_check("running_min_in_band", in_band >= self.param("min_in_band"))
        self.add_check("tail_infimum_settled", settled >= self.param("min_settled"))
        self.rows = [
            {
                "log_t": float(lt),
                "median_ratio": float(r),
                "median_running_min": float(m),
            }
            for lt, r, m in zip(log_times, np.median(ratios, axis=0), np.median(mins, axis=0))
        ]

    def _power_diagnostic(
        self, exponents: List[float], diag_log_t: List[float], results: List[Dict[str, Any]]
    ) -> None:
        inside = np.array([r["inside"] for r in results], dtype=float)
        fractions = inside.mean(axis=0)
        self.add_report_entry(
            "power_scaling_fraction",
            theoretical="shrinks to 0 for every exponent",
            empirical={
                f"a={a:g}": {f"log_t={lt:g}": float(fr) for lt, fr in zip(diag_log_t, row)}
                for a, row in zip(exponents, fractions)
            },
        )
