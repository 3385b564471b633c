"""JSON Schema validation for the neutral scene/map interchange formats.

These schema files are the published contract for anything that wants to
feed this pipeline (exporters, simulators). Validation errors list every
offending path, not just the first.
"""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema

from .errors import InputError

_SCHEMA_DIR = Path(__file__).parent / "schemas"


def schema_path(name: str) -> Path:
    return _SCHEMA_DIR / f"{name}.schema.json"


def _load(name: str) -> dict:
    return json.loads(schema_path(name).read_text())


def _validate(doc, name: str) -> None:
    validator = jsonschema.Draft7Validator(_load(name))
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        details = [
            f"{'/'.join(str(p) for p in e.absolute_path) or '<root>'}: {e.message}"
            for e in errors[:20]
        ]
        raise InputError(f"{name} schema violations: " + "; ".join(details))


def validate_raw_scene(doc) -> None:
    _validate(doc, "rawscene")


def validate_map(doc) -> None:
    _validate(doc, "map")
