"""
Base Experiment for the pssmp-limits Command Set

This module defines the base experiment class with common naming conventions,
configuration access, report assembly and replicate fan-out for all commands.
"""
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Any, Callable, Dict, List, Optional, Tuple

from experiments.config import ExperimentConfig
from pssmp_limits.errors import ToleranceFailure, UsageError
from pssmp_limits.lamperti import PssmpPath
from pssmp_limits.mc_stats import SeedPlan
from pssmp_limits.path_engine import PathSimulator
from pssmp_limits.subordinator_models import SubordinatorSpec


class BaseExperiment:
    """
    Base class for pssmp-limits commands.

    Provides common functionality including:
    - Standardized output naming
    - Parameter access and replicate seeding
    - Report entries and --check verdicts
    - Parallel replicate execution ordered by index
    """

    name = ""
    requires_spec = True
    PARAMETERS: Dict[str, Any] = {}

    def __init__(self, config: ExperimentConfig, jobs: int = 1, timing: bool = False) -> None:
        """
        Initialize the experiment.

        Args:
            config: Resolved configuration
            jobs: Worker processes for replicates
            timing: Report wall-clock runtime (breaks byte-identical reruns)
        """
        if jobs < 1:
            raise UsageError(f"--jobs must be at least 1, got {jobs}")
        self.logger = logging.getLogger(self.__class__.__module__)
        self.config = config
        self.jobs = jobs
        self.timing = timing
        self.project_name = "pssmp-limits"

        self.theoretical: Dict[str, Any] = {}
        self.empirical: Dict[str, Any] = {}
        self.stderr_or_ks: Dict[str, Any] = {}
        self.checks: Dict[str, bool] = {}
        self.rows: List[Dict[str, Any]] = []

        self._setup_common_config()

    def _setup_common_config(self) -> None:
        """Set up common configuration values used across commands."""
        self.alpha = self.config.alpha
        self.spec = self.config.spec
        self.params = self.config.params
        self.seed_plan = SeedPlan(self.config.seed)

    def param(self, key: str) -> Any:
        return self.params[key]

    def get_output_name(self, suffix: str = "") -> str:
        """
        Generate a standardized output file name.

        Args:
            suffix: Optional suffix to append to the name

        Returns:
            File name following the naming convention
        """
        base_name = f"{self.project_name}-{self.name}-{self.config.profile}-seed{self.config.seed}"
        if suffix:
            base_name = f"{base_name}-{suffix}"
        return f"{base_name}.{self.config.format}"

    def add_report_entry(
        self,
        key: str,
        theoretical: Any = None,
        empirical: Any = None,
        uncertainty: Any = None,
    ) -> None:
        """Record a theoretical value next to its empirical estimate."""
        if theoretical is not None:
            self.theoretical[key] = theoretical
        if empirical is not None:
            self.empirical[key] = empirical
        if uncertainty is not None:
            self.stderr_or_ks[key] = uncertainty

    def add_check(self, key: str, passed: bool) -> None:
        self.checks[key] = bool(passed)
        if not passed:
            self.logger.warning(f"Check '{key}' failed")

    def get_common_metadata(self) -> Dict[str, Any]:
        """
        Get the configuration echo attached to every report.

        Returns:
            Dictionary of configuration fields
        """
        echo = self.config.echo()
        echo["jobs"] = self.jobs
        return echo

    def map_replicates(self, func: Callable[..., Any], count: int, **kwargs) -> List[Any]:
        """
        Run func(index, master_seed, **kwargs) for index = 0..count-1.

        func must be a module-level function so worker processes can import it.
        Results come back in index order whatever the worker count.
        """
        task = partial(func, master_seed=self.config.seed, **kwargs)
        if self.jobs == 1 or count == 1:
            return [task(i) for i in range(count)]
        with ProcessPoolExecutor(max_workers=self.jobs) as pool:
            return list(pool.map(task, range(count)))

    def execute(self) -> None:
        """Fill report entries, checks and rows."""
        raise NotImplementedError

    def run(self) -> Dict[str, Any]:
        """
        Execute the experiment and assemble its report.

        Returns:
            Report dictionary with command, config_echo, theoretical, empirical,
            stderr_or_ks, verdict and runtime_s
        """
        self.logger.info(f"Running {self.name} (profile {self.config.profile}, seed {self.config.seed})")
        started = time.perf_counter()
        self.execute()
        runtime = time.perf_counter() - started
        self.logger.info(f"{self.name} finished in {runtime:.1f}s")

        return {
            "command": self.name,
            "config_echo": self.get_common_metadata(),
            "theoretical": self.theoretical,
            "empirical": self.empirical,
            "stderr_or_ks": self.stderr_or_ks,
            "verdict": self.verdict(),
            "runtime_s": runtime if self.timing else None,
        }

    def verdict(self) -> Dict[str, Any]:
        if not self.checks:
            return {"status": "none", "checks": {}}
        status = "pass" if all(self.checks.values()) else "fail"
        return {"status": status, "checks": dict(self.checks)}

    def enforce(self, report: Dict[str, Any]) -> None:
        """
        Raise when a --check run has a failing verdict.

        Raises:
            ToleranceFailure: If any check failed
        """
        failed = [k for k, ok in report["verdict"]["checks"].items() if not ok]
        if failed:
            raise ToleranceFailure(f"{self.name}: failed checks {', '.join(failed)}", {"failed": failed})


def replicate_stream(master_seed: int, index: int, purpose: int = 0):
    """Random generator of one replicate."""
    return SeedPlan(master_seed).stream(index, purpose)


def pssmp_to_log_time(
    spec: SubordinatorSpec, alpha: float, log_t: float, rng, step: Optional[float]
) -> PssmpPath:
    """pssMp from x0 = 1 whose clock covers X-time exp(log_t) with margin e^10."""
    level = (log_t + 10.0) / alpha
    path = PathSimulator(step).simulate_to_level(spec, level, rng)
    return PssmpPath(alpha, 1.0, path)
