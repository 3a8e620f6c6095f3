import json
import math

import numpy as np
import pytest

from pssmp_limits.subordinator_models import JumpLaw, SubordinatorSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def stable_half():
    return SubordinatorSpec.stable(0.5)


@pytest.fixture
def gamma_one():
    return SubordinatorSpec.gamma(1.0, 1.0)


@pytest.fixture
def cp_log2():
    return SubordinatorSpec.compound_poisson(1.0, JumpLaw.point_mass(math.log(2.0)))


@pytest.fixture
def profiles_path(tmp_path):
    """A small profile document with fast defaults for CLI tests."""
    stable = {"kind": "stable", "beta": 0.5, "scale": 1.0}
    document = {
        "tiny": {
            "description": "Test profile",
            "log_level": "WARNING",
            "seed": 7,
            "commands": {
                "tabulate-v": {
                    "alpha": 1.0,
                    "params": {"beta": 0.5, "v_max": 4.0, "points": 4},
                },
                "dump-path": {
                    "spec": stable,
                    "alpha": 1.0,
                    "params": {
                        "horizon": 0.5,
                        "step": 0.01,
                        "x0": 1.0,
                        "times": [0.1, 0.2],
                        "passage_level": 0.5,
                    },
                },
                "short-time": {
                    "spec": stable,
                    "alpha": 1.0,
                    "params": {"t": 1e-6, "n_samples": 1500, "steps": 16, "ks_tolerance": 0.2},
                },
                "integral-test": {
                    "spec": stable,
                    "alpha": 1.0,
                    "params": {
                        "functions": [
                            {"exponent": 2.0, "expect": "converges"},
                            {"exponent": 0.5, "expect": "diverges"},
                        ],
                        "t0": 256.0,
                        "doublings": 20,
                        "check_stability": False,
                    },
                },
            },
        }
    }
    path = tmp_path / "profiles.json"
    path.write_text(json.dumps(document))
    return str(path)
