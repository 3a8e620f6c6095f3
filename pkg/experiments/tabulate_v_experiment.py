"""
V-Law Table

Density and distribution function of V on a grid, for external plotting.
"""
import numpy as np

from experiments.base_experiment import BaseExperiment
from pssmp_limits.errors import DegenerateLawError
from pssmp_limits.limit_laws import v_cdf, v_density


class TabulateVExperiment(BaseExperiment):
    name = "tabulate-v"
    requires_spec = False
    PARAMETERS = {
        "beta": (float,),
        "v_max": (float,),
        "points": (int,),
    }

    def execute(self) -> None:
        beta = self.param("beta")
        grid = np.linspace(0.0, self.param("v_max"), self.param("points") + 1)[1:]
        try:
            pdf = v_density(self.alpha, beta, grid)
            cdf = v_cdf(self.alpha, beta, grid)
        except DegenerateLawError as e:
            self.logger.warning(f"V law is degenerate for beta={beta}: {e.flag}")
            self.add_report_entry("degenerate_flag", theoretical=e.flag)
            return
        self.add_report_entry("cdf_at_v_max", theoretical=float(cdf[-1]))
        self.rows = [
            {"v": float(v), "pdf": float(p), "cdf": float(c)} for v, p, c in zip(grid, pdf, cdf)
        ]
