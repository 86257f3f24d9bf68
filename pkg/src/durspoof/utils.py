"""Utility & helper functions."""

from __future__ import annotations

import dataclasses
import typing
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Mapping, Type, TypeVar, Union

import yaml

from durspoof.errors import ConfigurationError

T = TypeVar("T")


def load_yaml(path: Union[str, Path]) -> Dict[str, Any]:
    """Read a YAML mapping from ``path``.

    Raises:
        ConfigurationError: If the file is missing, unparsable or not a mapping.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    try:
        with open(path, encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"{path}: invalid YAML ({exc})") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: expected a mapping at the top level, got {type(data).__name__}")
    return data


def build_dataclass(cls: Type[T], data: Mapping[str, Any], prefix: str = "") -> T:
    """Instantiate dataclass ``cls`` from a nested mapping.

    Nested dataclass fields are built recursively from nested mappings.

    Raises:
        ConfigurationError: On unknown keys (named by their dotted path) or
            values the dataclass rejects.
    """
    if not isinstance(data, Mapping):
        raise ConfigurationError(f"{prefix or cls.__name__}: expected a mapping, got {data!r}")
    hints = typing.get_type_hints(cls)
    known = {f.name: f for f in dataclasses.fields(cls) if f.init}  # type: ignore[arg-type]
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigurationError(f"unknown config key '{prefix}{unknown[0]}' (known: {', '.join(sorted(known))})")
    kwargs: Dict[str, Any] = {}
    for name, value in data.items():
        hint = hints.get(name)
        if isinstance(hint, type) and dataclasses.is_dataclass(hint) and isinstance(value, Mapping):
            value = build_dataclass(hint, value, f"{prefix}{name}.")
        kwargs[name] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigurationError(f"{prefix or cls.__name__}: {exc}") from exc


def dataclass_to_dict(obj: Any) -> Any:
    """Recursively convert dataclasses to plain YAML-friendly values."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: dataclass_to_dict(getattr(obj, f.name)) for f in dataclasses.fields(obj) if f.repr}
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (list, tuple)):
        return [dataclass_to_dict(v) for v in obj]
    if isinstance(obj, dict):
        return {k: dataclass_to_dict(v) for k, v in obj.items()}
    if isinstance(obj, Path):
        return str(obj)
    return obj


def set_dotted(data: Dict[str, Any], dotted_key: str, value: Any) -> None:
    """Assign ``value`` at ``a.b.c`` inside nested dicts, creating levels as needed."""
    parts = dotted_key.split(".")
    if not all(parts):
        raise ConfigurationError(f"invalid override key {dotted_key!r}")
    node = data
    for part in parts[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigurationError(f"cannot override {dotted_key!r}: {part!r} is not a section")
        node = child
    node[parts[-1]] = value
