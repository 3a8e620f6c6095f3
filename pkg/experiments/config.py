"""
Experiment Configuration

Loads profile defaults and user configuration documents (JSON or YAML) and merges
them with command-line overrides into a validated ExperimentConfig. Unknown
fields are rejected before any computation starts.
"""
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple, Union

import yaml

from pssmp_limits.errors import ConfigError, PssmpError
from pssmp_limits.schemas import validate_document
from pssmp_limits.subordinator_models import SubordinatorSpec

logger = logging.getLogger(__name__)

DEFAULT_PROFILES_PATH = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "experiments.json")


@dataclass
class ExperimentConfig:
    """Fully resolved configuration of one command run."""

    command: str
    profile: str
    alpha: float
    seed: int
    output: Optional[str]
    format: str
    params: Dict[str, Any]
    spec_document: Optional[Dict[str, Any]] = None
    spec: Optional[SubordinatorSpec] = field(default=None, repr=False)

    def echo(self) -> Dict[str, Any]:
        """Configuration as it is echoed into reports."""
        return {
            "command": self.command,
            "profile": self.profile,
            "spec": self.spec_document,
            "alpha": self.alpha,
            "seed": self.seed,
            "params": self.params,
        }


def load_document(path: str) -> Dict[str, Any]:
    """Read a JSON or YAML mapping.

    Files ending in ``.json`` go through the json module so exponent floats
    such as ``1e-06`` stay numeric; everything else is parsed as YAML.
    """
    try:
        with open(path, "r", encoding="utf-8") as handle:
            if path.endswith(".json"):
                document = json.load(handle)
            else:
                document = yaml.safe_load(handle)
    except FileNotFoundError:
        raise ConfigError(f"Configuration file not found: {path}")
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigError(f"Configuration file {path} is not valid JSON/YAML: {str(e)}")
    if document is None:
        return {}
    if not isinstance(document, dict):
        raise ConfigError(f"Configuration file {path} must contain a mapping")
    return document


def load_profile(name: str, path: str = DEFAULT_PROFILES_PATH) -> Dict[str, Any]:
    profiles = load_document(path)
    profile = profiles.get(name)
    if not profile:
        raise ConfigError(f"Configuration for profile '{name}' not found in {os.path.basename(path)}")
    return profile


ParameterDecl = Union[Tuple[type, ...], Dict[str, Any]]

_JSON_TYPES = {float: "number", int: "integer", bool: "boolean", str: "string", list: "array", dict: "object"}


def params_schema(parameters: Dict[str, ParameterDecl]) -> Dict[str, Any]:
    """
    JSON Schema of a command's parameter mapping.

    Args:
        parameters: Declared Python types, or a schema fragment, per parameter

    Returns:
        Schema requiring every parameter and rejecting unknown ones
    """
    properties: Dict[str, Any] = {}
    for name, declared in parameters.items():
        if isinstance(declared, dict):
            properties[name] = declared
        else:
            types = [_JSON_TYPES[t] for t in declared]
            properties[name] = {"type": types[0] if len(types) == 1 else types}
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "type": "object",
        "properties": properties,
        "required": sorted(parameters),
        "additionalProperties": False,
    }


def _coerce(value: Any, declared: ParameterDecl) -> Any:
    if isinstance(declared, dict) or isinstance(value, bool):
        return value
    if float in declared and isinstance(value, int):
        return float(value)
    if int in declared and isinstance(value, float):
        return int(value)
    return value


def resolve_config(
    command: str,
    profile_name: str,
    profile: Dict[str, Any],
    parameters: Dict[str, ParameterDecl],
    requires_spec: bool,
    user_document: Optional[Dict[str, Any]] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> ExperimentConfig:
    """
    Merge profile defaults, a user document and CLI overrides.

    The user document is checked against the published config schema, the merged
    parameters against the command's parameter schema, and the spec against the
    subordinator_spec schema.

    Args:
        command: Command name
        profile_name: Name of the selected profile
        profile: Profile mapping (from experiments.json)
        parameters: Declared parameter types (or schema fragments) of the command
        requires_spec: Whether the command needs a subordinator spec
        user_document: Parsed user configuration, if any
        overrides: Non-None CLI values for seed, output and format

    Returns:
        Validated ExperimentConfig

    Raises:
        ConfigError: On schema violations or invalid specs
    """
    user = dict(user_document or {})
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}

    validate_document(user, "config", "configuration")
    if "command" in user and user["command"] != command:
        raise ConfigError(f"Configuration is for command '{user['command']}', not '{command}'")

    defaults = profile.get("commands", {}).get(command)
    if defaults is None:
        raise ConfigError(f"Profile '{profile_name}' has no defaults for command '{command}'")

    params = dict(defaults.get("params", {}))
    params.update(user.get("params", {}))
    validate_document(params, params_schema(parameters), f"parameters for '{command}'")
    params = {k: _coerce(params[k], parameters[k]) for k in sorted(parameters)}

    resolved = {
        "alpha": user.get("alpha", defaults.get("alpha", 1.0)),
        "seed": overrides.get("seed", user.get("seed", profile.get("seed", 0))),
        "format": overrides.get("format", user.get("format", "json")),
        "output": overrides.get("output", user.get("output")),
    }
    validate_document(resolved, "config", "resolved configuration")

    spec_document = user.get("spec", defaults.get("spec"))
    spec = None
    if requires_spec:
        if spec_document is None:
            raise ConfigError(f"Command '{command}' needs a subordinator spec")
        try:
            spec = SubordinatorSpec.from_document(spec_document)
        except ConfigError:
            raise
        except PssmpError as e:
            raise ConfigError(f"Invalid subordinator spec: {str(e)}")

    config = ExperimentConfig(
        command=command,
        profile=profile_name,
        alpha=float(resolved["alpha"]),
        seed=int(resolved["seed"]),
        output=resolved["output"],
        format=resolved["format"],
        params=params,
        spec_document=spec_document,
        spec=spec,
    )
    logger.debug(f"Resolved configuration: {config.echo()}")
    return config
