"""
Fragmentation Experiment

Ties a binary self-similar fragmentation to increasing pssMps: the left-most
fragment against the Lamperti construction from its compound Poisson
subordinator, mass conservation of the event loop, the empirical measure rho_t
against the size-biased tagged fragment, and the V law of the left-most fragment
for heavy-tailed splits.
"""
import math
from typing import List, Tuple

import numpy as np

from experiments.base_experiment import BaseExperiment, pssmp_to_log_time, replicate_stream
from pssmp_limits.fragmentation import (
    BinarySplitLaw,
    FragmentationSimulator,
    TagMode,
    empirical_rho,
    fragmentation_rv_index,
    levy_tail_from_nu,
    phi_fragmentation,
    tagged_jump_sizes,
    tagged_log_sizes_at,
)
from pssmp_limits.limit_laws import v_cdf
from pssmp_limits.mc_stats import EmpiricalDistribution, ks_distance, ks_two_sample
from pssmp_limits.subordinator_models import SubordinatorSpec

CHUNK_SIZE = 1024
_TAG_PURPOSE = 1
_POP_PURPOSE = 2
_LEFT_PURPOSE = 3
_CONSERVATION_SNAPSHOTS = 10


def lamperti_log_x_chunk(
    index: int, master_seed: int, spec: SubordinatorSpec, alpha: float, log_t: float, total: int
) -> np.ndarray:
    """log X(t) of Lamperti-built pssMps, one chunk of paths."""
    size = min(CHUNK_SIZE, total - index * CHUNK_SIZE)
    rng = replicate_stream(master_seed, index)
    return np.array([
        float(pssmp_to_log_time(spec, alpha, log_t, rng, None).log_value_log_time(log_t))
        for _ in range(size)
    ])


def population_rho(
    index: int,
    master_seed: int,
    alpha: float,
    law: BinarySplitLaw,
    log_t: float,
    resample_cap: int,
    size_floor: float,
) -> Tuple[np.ndarray, np.ndarray, int]:
    """Atoms and weights of rho_t for one weighted population run."""
    rng = replicate_stream(master_seed, index, _POP_PURPOSE)
    t = math.exp(log_t)
    simulator = FragmentationSimulator(alpha, law, size_floor=size_floor, resample_cap=resample_cap)
    run = simulator.simulate(t, rng, snapshot_times=[t])
    rho = empirical_rho(run.snapshots[-1])
    return rho.atoms, rho.weights, run.resamplings


class FragmentationExperiment(BaseExperiment):
    """Tagged fragments, population runs and the Lamperti correspondence."""

    name = "frag"
    PARAMETERS = {
        "split_law": (dict,),
        "log_t_tagged": (float,),
        "n_tagged": (int,),
        "ks_tolerance": (float,),
        "conservation_t": (float,),
        "pop_log_t": (float,),
        "pop_seeds": (int,),
        "resample_cap": (int,),
        "log_size_floor": (float,),
        "rho_ks_tolerance": (float,),
        "mean_tolerance": (float,),
        "log_t_left": (float,),
        "left_ks_tolerance": (float,),
    }
    requires_spec = False

    def _setup_common_config(self) -> None:
        super()._setup_common_config()
        self.law = BinarySplitLaw.from_document(self.params["split_law"])

    def execute(self) -> None:
        self._characteristics()
        self._lamperti_correspondence()
        self._mass_conservation()
        if self.param("pop_seeds") > 0:
            self._empirical_measure()
        self._left_most_growth()

    def _characteristics(self) -> None:
        law = self.law
        q_values = (0.5, 1.0, 2.0)
        self.add_report_entry(
            "Phi",
            theoretical={f"q={q:g}": phi_fragmentation(law, q) for q in q_values},
        )
        self.add_report_entry("Phi_rv_index", empirical=fragmentation_rv_index(law))

        n = self.param("n_tagged")
        jumps = tagged_jump_sizes(law, n, self.seed_plan.stream(0, _TAG_PURPOSE), TagMode.SIZE_BIASED)
        xs = (0.5, 1.0, 3.0)
        self.add_report_entry(
            "size_biased_levy_tail",
            theoretical={f"x={x:g}": levy_tail_from_nu(law, x) for x in xs},
            empirical={f"x={x:g}": float(np.mean(jumps > x)) for x in xs},
        )

    def _lamperti_correspondence(self) -> None:
        log_t = self.param("log_t_tagged")
        n = self.param("n_tagged")
        tagged = -tagged_log_sizes_at(
            self.alpha, self.law, math.exp(log_t), n, self.seed_plan.stream(1, _TAG_PURPOSE), TagMode.LEFT_MOST
        )
        lamperti = np.concatenate(self.map_replicates(
            lamperti_log_x_chunk,
            int(math.ceil(n / CHUNK_SIZE)),
            spec=self.law.tagged_subordinator(TagMode.LEFT_MOST),
            alpha=self.alpha,
            log_t=log_t,
            total=n,
        ))
        statistic, critical = ks_two_sample(tagged, lamperti)
        self.add_report_entry(
            "left_most_vs_lamperti",
            empirical={"mean_tagged": float(tagged.mean()), "mean_lamperti": float(lamperti.mean())},
            uncertainty={"ks": statistic, "critical_1pct": critical},
        )
        self.add_check("left_most_vs_lamperti", statistic <= self.param("ks_tolerance"))

    def _mass_conservation(self) -> None:
        t = self.param("conservation_t")
        times = np.linspace(0.0, t, _CONSERVATION_SNAPSHOTS + 1)[1:]
        simulator = FragmentationSimulator(self.alpha, self.law, size_floor=0.0)
        run = simulator.simulate(t, self.seed_plan.stream(2, _TAG_PURPOSE), snapshot_times=times)
        worst = max(
            max(abs(float(np.sum(s.sizes)) - 1.0), abs(float(np.sum(s.weights)) - 1.0))
            for s in run.snapshots
        )
        self.add_report_entry(
            "mass_conservation",
            theoretical=0.0,
            empirical={"worst_error": worst, "events": run.events, "snapshots": len(run.snapshots)},
        )
        self.add_check("mass_conservation", worst <= 1e-12)

    def _empirical_measure(self) -> None:
        log_t = self.param("pop_log_t")
        runs = self.map_replicates(
            population_rho,
            self.param("pop_seeds"),
            alpha=self.alpha,
            law=self.law,
            log_t=log_t,
            resample_cap=self.param("resample_cap"),
            size_floor=math.exp(self.param("log_size_floor")),
        )
        tagged = tagged_log_sizes_at(
            self.alpha,
            self.law,
            math.exp(log_t),
            self.param("n_tagged"),
            self.seed_plan.stream(3, _TAG_PURPOSE),
            TagMode.SIZE_BIASED,
        ) / log_t
        reference = EmpiricalDistribution.from_samples(tagged)

        ks_values: List[float] = []
        means: List[float] = []
        for atoms, weights, _ in runs:
            rho = EmpiricalDistribution(atoms, weights, atoms.size)
            ks_values.append(ks_distance(rho, reference.cdf))
            means.append(rho.mean())
        mean_ks = float(np.mean(ks_values))
        mean_rho = float(np.mean(means))

        self.add_report_entry(
            "rho_vs_size_biased_tag",
            empirical={"seed_ks": ks_values, "resamplings": [r[2] for r in runs]},
            uncertainty={"mean_ks": mean_ks},
        )
        self.add_report_entry(
            "rho_mean", theoretical=-1.0 / self.alpha, empirical=mean_rho, uncertainty=float(np.std(means))
        )
        self.add_check("rho_vs_size_biased_tag", mean_ks <= self.param("rho_ks_tolerance"))
        self.add_check("rho_mean", abs(mean_rho + 1.0 / self.alpha) <= self.param("mean_tolerance"))

        pooled = EmpiricalDistribution.from_samples(
            np.concatenate([r[0] for r in runs]), np.concatenate([r[1] for r in runs])
        )
        grid = np.quantile(tagged, np.linspace(0.0, 1.0, 101))
        self.rows = [
            {"x": float(x), "rho_cdf": float(p), "tagged_cdf": float(q)}
            for x, p, q in zip(grid, pooled.cdf(grid), reference.cdf(grid))
        ]

    def _left_most_growth(self) -> None:
        beta = self.law.left_jump_law().tail_index
        if not 0.0 < beta < 1.0:
            self.add_report_entry("left_most_v_law", theoretical=f"degenerate: jump index {beta:g}")
            return
        log_t = self.param("log_t_left")
        log_sizes = tagged_log_sizes_at(
            self.alpha,
            self.law,
            math.exp(log_t),
            self.param("n_tagged"),
            self.seed_plan.stream(0, _LEFT_PURPOSE),
            TagMode.LEFT_MOST,
        )
        statistic = -log_sizes / log_t - 1.0 / self.alpha
        ks = ks_distance(
            EmpiricalDistribution.from_samples(statistic), lambda v: v_cdf(self.alpha, beta, v)
        )
        self.add_report_entry(
            "left_most_v_law",
            theoretical={"beta": beta},
            empirical={"median": float(np.median(statistic))},
            uncertainty={"ks": ks},
        )
        self.add_check("left_most_v_law", ks <= self.param("left_ks_tolerance"))
