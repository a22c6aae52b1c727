# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""YAML/JSON config loading helpers."""

from __future__ import annotations

import json
from functools import lru_cache
from pathlib import Path
from typing import Any, Iterable

import yaml  # type: ignore[import-untyped]
from jsonschema import Draft202012Validator
from pydantic import ValidationError

from oaca.config.models import OacaSettings
from oaca.core.errors import InvalidConfig, OacaDataError
from oaca.core.models import SimConfigModel
from oaca.core.simulate import parse_sim_config

PRESETS: tuple[str, ...] = ("null", "confounded-null", "planted-30", "paper-shape")

_DEFAULTS_DIR = Path(__file__).resolve().parent / "defaults"


class SimConfigSchemaError(OacaDataError):
    """Raised when a SimConfig document does not match the shipped JSON Schema."""


def load_yaml_file(path: Path) -> dict[str, Any]:
    if not path.is_file():
        raise OacaDataError(f"Config file not found: {path}")
    with path.open("r", encoding="utf-8") as fh:
        try:
            loaded = yaml.safe_load(fh) or {}
        except yaml.YAMLError as exc:
            raise OacaDataError(f"Config file {path} is not valid YAML/JSON: {exc}") from exc
    if not isinstance(loaded, dict):
        actual_type = type(loaded).__name__
        raise OacaDataError(
            f"Config file {path} has invalid top-level structure.\n"
            f"Expected: mapping (key: value pairs)\n"
            f"Found: {actual_type}\n"
            f"Fix: Ensure the file starts with key-value pairs, not a list or scalar."
        )
    return loaded


def load_config(path: str | Path | None = None) -> OacaSettings:
    """Pipeline settings from a YAML or JSON file; defaults when `path` is None."""
    data = {} if path is None else load_yaml_file(Path(path).expanduser().resolve())
    try:
        return OacaSettings(**data)
    except ValidationError as exc:
        raise InvalidConfig(validation_messages(exc), what="pipeline config") from exc


def default_config_path() -> Path:
    return _DEFAULTS_DIR / "oaca.yaml"


def load_sim_config(path: str | Path) -> SimConfigModel:
    """Schema-check, then model-validate, a SimConfig document or a preset name."""
    text = str(path)
    if text in PRESETS:
        return load_preset(text)
    source = Path(text).expanduser().resolve()
    document = load_yaml_file(source)
    validate_sim_document(document, source)
    return parse_sim_config(document)


def load_preset(name: str) -> SimConfigModel:
    if name not in PRESETS:
        raise OacaDataError(f"Unknown preset '{name}'. Fix: choose one of {', '.join(PRESETS)}.")
    source = _DEFAULTS_DIR / "presets" / f"{name}.json"
    document = load_yaml_file(source)
    validate_sim_document(document, source)
    return parse_sim_config(document)


def validate_sim_document(document: dict[str, Any], source: Path, *, version: str = "v1alpha1") -> None:
    validator = _schema_validator("sim-config", version)
    errors = sorted(
        validator.iter_errors(document),
        key=lambda err: (_format_json_path(err.absolute_path), err.message),
    )
    if not errors:
        return

    first = errors[0]
    location = _format_json_path(first.absolute_path)
    extra = f" ({len(errors) - 1} additional error(s))" if len(errors) > 1 else ""
    raise SimConfigSchemaError(f"SimConfig schema validation failed for {source}: {location}: {first.message}{extra}")


def validation_messages(exc: ValidationError) -> list[str]:
    return [
        f"{'.'.join(str(part) for part in item['loc']) or '$'}: {item['msg']}"
        for item in exc.errors(include_url=False)
    ]


def _format_json_path(path_parts: Iterable[Any]) -> str:
    location = "$"
    for part in path_parts:
        if isinstance(part, int):
            location += f"[{part}]"
        else:
            location += f".{part}"
    return location


@lru_cache(maxsize=4)
def _schema_validator(schema_name: str, version: str) -> Draft202012Validator:
    schema_path = Path(__file__).resolve().parents[1] / "schemas" / version / f"{schema_name}.schema.json"
    if not schema_path.exists():
        raise FileNotFoundError(
            f"Schema file '{schema_name}.schema.json' ({version}) not found at: {schema_path}\n"
            f"Fix: Ensure oaca-toolkit is properly installed. Try: pip install -U oaca-toolkit"
        )

    with schema_path.open("r", encoding="utf-8") as fh:
        schema = json.load(fh)

    return Draft202012Validator(schema)
