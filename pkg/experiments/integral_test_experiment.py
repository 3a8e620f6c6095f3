"""
Integral Test Experiment

Classifies candidate upper envelopes f by the convergence of the integral of
phi(1 / f(g(t))) and checks that each verdict survives a doubled schedule.
"""
from typing import Any, Dict, List

from experiments.base_experiment import BaseExperiment
from pssmp_limits.limit_laws import GrowthDescriptor, IntegralTestClassifier, Verdict

FUNCTION_SCHEMA = {
    "type": "array",
    "items": {
        "type": "object",
        "properties": {
            "exponent": {"type": "number", "minimum": 0},
            "log_power": {"type": "number"},
            "expect": {"enum": [v.value for v in Verdict]},
        },
        "required": ["exponent"],
        "additionalProperties": False,
    },
}


class IntegralTestExperiment(BaseExperiment):
    """Upper-envelope verdicts for a list of growth descriptors."""

    name = "integral-test"
    PARAMETERS = {
        "functions": FUNCTION_SCHEMA,
        "t0": (float,),
        "doublings": (int,),
        "check_stability": (bool,),
    }

    def _setup_common_config(self) -> None:
        super()._setup_common_config()
        self.candidates: List[Dict[str, Any]] = []
        for doc in self.params["functions"]:
            descriptor = GrowthDescriptor.from_document({k: v for k, v in doc.items() if k != "expect"})
            self.candidates.append({"f": descriptor, "expect": doc.get("expect")})

    def execute(self) -> None:
        t0, doublings = self.param("t0"), self.param("doublings")
        classifier = IntegralTestClassifier(t0=t0, doublings=doublings)
        doubled = IntegralTestClassifier(t0=t0, doublings=2 * doublings)

        for candidate in self.candidates:
            f: GrowthDescriptor = candidate["f"]
            result = classifier.classify(self.spec, f)
            self.add_report_entry(
                f.label,
                theoretical=candidate["expect"],
                empirical=result.verdict.value,
                uncertainty={
                    "final_exponent": float(result.exponents[-1]),
                    "positive_increase": result.positive_increase,
                },
            )
            if candidate["expect"] is not None:
                self.add_check(f"{f.label} verdict", result.verdict.value == candidate["expect"])
            if self.param("check_stability"):
                again = doubled.classify(self.spec, f)
                self.add_check(f"{f.label} stable under doubling", again.verdict == result.verdict)
            self.rows.extend({"function": f.label, **row} for row in result.trace)
