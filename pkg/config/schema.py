"""
JSON schemas (Draft 7) for the INI sections

Values arrive from configparser as strings; ``Config`` coerces them using the
``type`` of each property before validation. Arrays are comma-separated
lists in the INI text. Every object schema forbids unknown keys.
"""
from typing import Any, Dict, Iterable

POSITIVE = {"type": "number", "exclusiveMinimum": 0}
NONNEGATIVE = {"type": "number", "minimum": 0}
POSITIVE_INT = {"type": "integer", "minimum": 1}
POSITIVE_GRID = {"type": "array", "items": POSITIVE, "minItems": 1}
INT_GRID = {"type": "array", "items": POSITIVE_INT, "minItems": 1}

# keys any experiment section may override from [general]
RUN_PROPERTIES: Dict[str, Any] = {
    "paths": POSITIVE_INT,
    "horizon": POSITIVE,
    "chunk": POSITIVE_INT,
    "bootstrap": {"type": "integer", "minimum": 0},
    "cdf_samples": POSITIVE_INT,
    "assertions": {"type": "boolean"},
    "dump": {"type": "boolean"},
}

MEASURE_PROPERTIES: Dict[str, Any] = {
    "family": {"type": "string", "enum": ["two-point", "stable-like", "atoms", "ladder", "none"]},
    "eps0": POSITIVE,
    "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 2},
    "c": POSITIVE,
    "cutoff": POSITIVE,
    "atoms": {"type": "string"},
    "levels": POSITIVE_INT,
    "a": {"type": "number"},
    "b": NONNEGATIVE,
}

PATH_PROPERTIES: Dict[str, Any] = {
    "sigma": {"type": "string", "enum": ["constant", "clipped-sine", "rational"]},
    "sigma_level": POSITIVE,
    "x0": {"type": "number"},
}

GENERAL_SCHEMA: Dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "properties": {
        "seed": {"type": "integer", "minimum": 0},
        "threads": POSITIVE_INT,
        "out": {"type": "string"},
        **{k: v for k, v in RUN_PROPERTIES.items() if k not in ("assertions", "dump")},
    },
    "required": ["seed", "threads", "out", "paths", "horizon", "chunk", "bootstrap", "cdf_samples"],
    "additionalProperties": False,
}

LOGGING_SCHEMA: Dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "properties": {
        "level": {"type": "string", "enum": ["TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR"]},
        "file": {"type": "string"},
    },
    "additionalProperties": False,
}


def experiment_schema(properties: Dict[str, Any], required: Iterable[str] = ()) -> Dict[str, Any]:
    """Object schema for one experiment section; run keys are always allowed"""
    return {
        "$schema": "http://json-schema.org/draft-07/schema#",
        "type": "object",
        "properties": {**RUN_PROPERTIES, **properties},
        "required": list(required),
        "additionalProperties": False,
    }
