"""Run configuration: JSON file values, overridden by command-line flags."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .geodesic_engine import DEFAULT_TOL


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    delta: list[float] = field(default_factory=lambda: [0.1, 0.5, 1.0])
    n_max: int = 64
    tol: float = DEFAULT_TOL
    out: str = "out"
    format: str = "both"
    svg: bool = False
    seed: int = 0

    def validate(self) -> "RunConfig":
        if not self.delta:
            raise ConfigError("delta list is empty")
        if any(d <= 0 for d in self.delta):
            raise ConfigError("delta values must be positive")
        if self.n_max < 1:
            raise ConfigError("n_max must be at least 1")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.format not in ("json", "csv", "both"):
            raise ConfigError("format must be json, csv or both")
        return self

    @property
    def formats(self) -> tuple[str, ...]:
        return ("json", "csv") if self.format == "both" else (self.format,)

    def to_json(self) -> dict:
        return asdict(self)


def _coerce(name: str, value):
    if name == "delta":
        if isinstance(value, (int, float)):
            return [float(value)]
        if isinstance(value, str):
            return [float(x) for x in value.split(",") if x.strip()]
        return [float(x) for x in value]
    if name in ("n_max", "seed"):
        return int(value)
    if name == "tol":
        return float(value)
    if name == "svg":
        return bool(value)
    return str(value)


def load_config(path: str | Path | None = None, **overrides) -> RunConfig:
    """Defaults, then the JSON file (keys may use ``-`` or ``_``), then non-None overrides."""
    known = {f.name for f in fields(RunConfig)}
    values: dict = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
        for k, v in raw.items():
            key = k.replace("-", "_")
            if key not in known:
                raise ConfigError(f"unknown config key {k!r}")
            values[key] = _coerce(key, v)
    for k, v in overrides.items():
        if v is not None:
            values[k] = _coerce(k, v)
    try:
        return RunConfig(**values).validate()
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
