import re

import jsonschema
import pytest

from experiments.config import load_document, load_profile, params_schema, resolve_config
from pssmp_limits.errors import ConfigError
from pssmp_limits.subordinator_models import SubordinatorKind

PARAMETERS = {"n": (int,), "tolerance": (float,), "flag": (bool,)}
PROFILE = {
    "seed": 11,
    "commands": {
        "demo": {
            "spec": {"kind": "stable", "beta": 0.5},
            "alpha": 2.0,
            "params": {"n": 10, "tolerance": 0.1, "flag": True},
        }
    },
}


def resolve(user=None, overrides=None, requires_spec=True):
    return resolve_config("demo", "unit", PROFILE, PARAMETERS, requires_spec, user, overrides)


def test_profile_defaults():
    config = resolve()
    assert config.seed == 11
    assert config.alpha == 2.0
    assert config.format == "json"
    assert config.spec.kind == SubordinatorKind.STABLE
    assert config.echo()["params"] == {"flag": True, "n": 10, "tolerance": 0.1}


def test_precedence():
    config = resolve(
        {"seed": 5, "alpha": 1, "params": {"tolerance": 1}, "format": "csv"},
        {"seed": 9, "output": "out.csv", "format": None},
    )
    assert config.seed == 9
    assert config.alpha == 1.0
    assert config.params["tolerance"] == 1.0
    assert config.format == "csv"
    assert config.output == "out.csv"


@pytest.mark.parametrize(
    "user,message",
    [
        ({"colour": "red"}, "Additional properties are not allowed ('colour' was unexpected)"),
        ({"command": "lil"}, "not 'demo'"),
        ({"params": {"extra": 1}}, "Additional properties are not allowed ('extra' was unexpected)"),
        ({"params": {"n": "ten"}}, "'ten' is not of type 'integer'"),
        ({"params": {"n": True}}, "True is not of type 'integer'"),
        ({"seed": -1}, "-1 is less than the minimum of 0"),
        ({"alpha": 0.0}, "0.0 is less than or equal to the minimum of 0"),
        ({"format": "xml"}, "'xml' is not one of ['json', 'csv']"),
        ({"spec": {"kind": "stable"}}, "'beta' is a required property"),
        ({"spec": {"kind": "stable", "beta": 2.0}}, "2.0 is greater than or equal to the maximum of 1"),
        ({"spec": [1, 2]}, "is not of type 'object', 'null'"),
    ],
)
def test_rejections(user, message):
    with pytest.raises(ConfigError, match=re.escape(message)) as excinfo:
        resolve(user)
    assert excinfo.value.exit_code == 2


def test_rejection_names_the_location():
    with pytest.raises(ConfigError, match="Invalid parameters for 'demo' at 'n'"):
        resolve({"params": {"n": 1.5}})


def test_integral_values_are_coerced():
    config = resolve({"seed": 4.0, "params": {"n": 3.0, "tolerance": 2}})
    assert config.seed == 4 and isinstance(config.seed, int)
    assert isinstance(config.params["n"], int)
    assert isinstance(config.params["tolerance"], float)


def test_params_schema():
    schema = params_schema({"n": (int,), "x": (float, int), "law": {"type": "object"}})
    jsonschema.Draft202012Validator.check_schema(schema)
    assert schema["required"] == ["law", "n", "x"]
    assert schema["properties"]["x"] == {"type": ["number", "integer"]}
    assert schema["properties"]["law"] == {"type": "object"}
    assert schema["additionalProperties"] is False



def test_spec_optional_for_some_commands():
    profile_without_spec = {"commands": {"demo": {"params": {"n": 1, "tolerance": 0.5, "flag": False}}}}
    config = resolve_config("demo", "unit", profile_without_spec, PARAMETERS, False)
    assert config.spec is None
    with pytest.raises(ConfigError, match="needs a subordinator spec"):
        resolve_config("demo", "unit", profile_without_spec, PARAMETERS, True)


def test_missing_parameter():
    profile = {"commands": {"demo": {"params": {"n": 1}}}}
    with pytest.raises(ConfigError, match="is a required property"):
        resolve_config("demo", "unit", profile, PARAMETERS, False)


def test_yaml_document(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("seed: 3\nparams:\n  tolerance: 1.0e-6\n")
    document = load_document(str(path))
    assert document == {"seed": 3, "params": {"tolerance": 1e-6}}


def test_document_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_document(str(tmp_path / "missing.json"))
    path = tmp_path / "list.json"
    path.write_text("[1, 2]")
    with pytest.raises(ConfigError, match="must contain a mapping"):
        load_document(str(path))


def test_profile_lookup(profiles_path):
    assert load_profile("tiny", profiles_path)["seed"] == 7
    with pytest.raises(ConfigError, match="profile 'huge'"):
        load_profile("huge", profiles_path)


def test_shipped_profiles_cover_every_command():
    from app import COMMANDS

    for name in ("desk", "full"):
        profile = load_profile(name)
        for command, experiment in COMMANDS.items():
            config = resolve_config(
                command, name, profile, experiment.PARAMETERS, experiment.requires_spec
            )
            assert config.command == command
