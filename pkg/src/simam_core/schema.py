# -*- coding: utf-8 -*-
import json
import dataclasses
import typing
from enum import Enum
from pathlib import Path

import dirtyjson

from .errors import ConfigError

CONFIGS_DIR = Path(__file__).parent / "configs"


def from_dict(cls, data, path="$"):
    """
    Hydrate `data` (as produced by a JSON parser) into an instance of `cls`.

    Dataclasses reject unknown keys and fall back to field defaults for the
    missing ones; `__post_init__` validation of the target class runs as usual.
    """
    origin = typing.get_origin(cls)
    args = typing.get_args(cls)

    if dataclasses.is_dataclass(cls):
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected an object for {cls.__name__}")
        field_types = {
            f.name: f.type for f in dataclasses.fields(cls) if f.init
        }
        unknown = sorted(set(data) - set(field_types))
        if unknown:
            raise ConfigError(
                f"{path}: unknown field(s) {', '.join(unknown)} "
                f"for {cls.__name__}"
            )
        try:
            return cls(
                **{
                    k: from_dict(field_types[k], v, f"{path}.{k}")
                    for k, v in data.items()
                }
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{path}: {exc}") from exc

    elif origin is typing.Union:
        if data is None and type(None) in args:
            return None
        inner = [a for a in args if a is not type(None)]
        return from_dict(inner[0], data, path)

    elif origin in (list, typing.List):
        return [
            from_dict(args[0], v, f"{path}[{i}]") for i, v in enumerate(data)
        ]

    elif origin in (tuple, typing.Tuple):
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(
                from_dict(args[0], v, f"{path}[{i}]")
                for i, v in enumerate(data)
            )
        if len(args) != len(data):
            raise ConfigError(
                f"{path}: expected {len(args)} items, got {len(data)}"
            )
        return tuple(
            from_dict(a, v, f"{path}[{i}]")
            for i, (a, v) in enumerate(zip(args, data))
        )

    elif origin in (dict, typing.Dict):
        return {
            k: from_dict(args[1], v, f"{path}.{k}") for k, v in data.items()
        }

    elif isinstance(cls, type) and issubclass(cls, Enum):
        if data in cls.__members__:
            return cls[data]
        try:
            return cls(data)
        except ValueError:
            choices = ", ".join(cls.__members__)
            raise ConfigError(f"{path}: {data!r} is not one of {choices}")

    elif cls is float:
        if isinstance(data, bool) or not isinstance(data, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {data!r}")
        return float(data)

    elif cls is int:
        if isinstance(data, bool) or not isinstance(data, int):
            raise ConfigError(f"{path}: expected an integer, got {data!r}")
        return data

    else:
        return data


def to_dict(instance):
    """Inverse of `from_dict`: plain JSON-compatible structures."""
    if dataclasses.is_dataclass(instance):
        return {
            f.name: to_dict(getattr(instance, f.name))
            for f in dataclasses.fields(instance)
        }
    elif isinstance(instance, Enum):
        return instance.name
    elif isinstance(instance, (list, tuple)):
        return [to_dict(v) for v in instance]
    elif isinstance(instance, dict):
        return {k: to_dict(v) for k, v in instance.items()}
    else:
        return instance


def loads(text, source="<string>"):
    try:
        return dirtyjson.loads(text)
    except dirtyjson.Error as exc:
        lineno = getattr(exc, "lineno", "?")
        message = getattr(exc, "msg", str(exc))
        raise ConfigError(f"{source}:{lineno}: {message}") from exc


def load(cls, path):
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    data = loads(path.read_text(encoding="utf-8"), source=str(path))
    return from_dict(cls, _plain(data))


def dumps(instance):
    return json.dumps(to_dict(instance), indent=2, sort_keys=True) + "\n"


def resolve_path(name_or_path):
    """A shipped config name (`desk_scale`) or a filesystem path."""
    candidate = Path(name_or_path)
    if candidate.exists():
        return candidate
    shipped = CONFIGS_DIR / f"{name_or_path}.json"
    if shipped.exists():
        return shipped
    raise ConfigError(f"no such config: {name_or_path}")


def _plain(data):
    # dirtyjson returns attributed containers; hydrate from plain ones
    if isinstance(data, dict):
        return {str(k): _plain(v) for k, v in data.items()}
    elif isinstance(data, list):
        return [_plain(v) for v in data]
    return data
