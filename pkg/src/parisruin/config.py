"""Flat key = value experiment-config files.

One ``key = value`` pair per line; ``#`` starts a comment (whole line or
trailing) and blank lines are ignored. Values stay strings until they are
coerced against a command's schema, and unknown keys are rejected, so a
config round-trips losslessly through loads/dumps.
"""
from __future__ import annotations

from .errors import ParameterError


def loads(text: str) -> dict[str, str]:
    """Parse config text into an ordered key -> string-value mapping."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key:
            raise ParameterError(f"config line {lineno}: empty key")
        if key in out:
            raise ParameterError(f"config line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def dumps(cfg: dict) -> str:
    """Serialize a mapping back to the flat format (insertion order kept)."""
    return "".join(f"{key} = {value}\n" for key, value in cfg.items())


def load(path) -> dict[str, str]:
    with open(path, "r", encoding="utf-8") as handle:
        return loads(handle.read())


def coerce(cfg: dict, schema: dict, where: str = "config") -> dict:
    """Convert string values per `schema` (key -> caster); reject unknown keys."""
    unknown = sorted(set(cfg) - set(schema))
    if unknown:
        raise ParameterError(f"{where}: unknown keys {', '.join(unknown)}")
    out = {}
    for key, value in cfg.items():
        caster = schema[key]
        try:
            out[key] = caster(value)
        except (TypeError, ValueError) as exc:
            raise ParameterError(f"{where}: bad value for {key!r}: {value!r}") from exc
    return out
