"""
Published Document Schemas

JSON Schema files for run configurations, subordinator specs, splitting laws and
growth descriptors ship next to this module. Documents are validated against them
before any object is built; a mismatch becomes a ConfigError (exit code 2).
"""
import json
import logging
import os
from functools import lru_cache
from typing import Any, Dict, Union

import jsonschema

from pssmp_limits.errors import ConfigError

logger = logging.getLogger(__name__)

SCHEMA_DIR = os.path.dirname(os.path.abspath(__file__))


@lru_cache(maxsize=None)
def load_schema(name: str) -> Dict[str, Any]:
    """Read the shipped schema <name>.schema.json."""
    path = os.path.join(SCHEMA_DIR, f"{name}.schema.json")
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except FileNotFoundError:
        raise ConfigError(f"No published schema named '{name}'")


def validate_document(document: Any, schema: Union[str, Dict[str, Any]], where: str) -> None:
    """
    Validate a parsed document against a schema.

    Args:
        document: Parsed JSON or YAML value
        schema: Name of a shipped schema, or a schema mapping
        where: Label of the document in error messages

    Raises:
        ConfigError: If the document does not match the schema
    """
    if isinstance(schema, str):
        schema = load_schema(schema)
    try:
        jsonschema.validate(instance=document, schema=schema)
    except jsonschema.ValidationError as e:
        location = "/".join(str(part) for part in e.absolute_path)
        at = f" at '{location}'" if location else ""
        logger.debug(f"Schema violation in {where}{at}: {e.message}")
        raise ConfigError(
            f"Invalid {where}{at}: {e.message}",
            {"schema_path": [str(part) for part in e.absolute_schema_path]},
        )
