"""
Path Dump

One subordinator path as CSV (grid nodes, or jump epochs with the drift) plus the
Lamperti image X, tau and log C at requested X-times, and a first passage record.
"""
from dataclasses import asdict

from experiments.base_experiment import BaseExperiment
from pssmp_limits.lamperti import lamperti_forward
from pssmp_limits.path_engine import first_passage, simulate_path
from pssmp_limits.report_writer import path_rows


class DumpPathExperiment(BaseExperiment):
    name = "dump-path"
    PARAMETERS = {
        "horizon": (float,),
        "step": (float,),
        "x0": (float,),
        "times": (list,),
        "passage_level": (float,),
    }

    def execute(self) -> None:
        path = simulate_path(self.spec, self.param("horizon"), self.param("step"), self.seed_plan.stream(0))
        samples = lamperti_forward(path, self.alpha, self.param("x0"), [float(t) for t in self.param("times")])
        record = first_passage(path, self.param("passage_level"))

        self.add_report_entry("terminal_value", empirical=path.terminal_value)
        self.add_report_entry("lamperti", empirical=samples.to_rows())
        self.add_report_entry("first_passage", empirical=asdict(record))
        self.rows = path_rows(path)
