"""Run configuration for the command-line tools.

A run is described by one JSON object. Every key is optional (missing keys
take the defaults below) but unknown keys are rejected, and each value is
type- and range-checked so errors can name the offending field.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from .ensemble import EnsembleConfig
from .errors import ValidationError


class ConfigError(ValidationError):
    """Invalid run configuration; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"config field '{field}': {message}")
        self.field = field


@dataclass(frozen=True)
class RunConfig:
    # model and drive
    delta: float = 1.0
    m: float = 0.5
    omega: float = 0.4
    p: int = 3
    q: int = 2
    # initial dark-state superposition
    c: float = 1 / math.sqrt(2)
    dphi: float = math.pi / 2
    # sampling and integration
    n_traj: int = 400
    seed: int = 42
    t_end: float = 200.0
    dt: float = 0.01
    stride: int = 10
    # simulate: explicit start phases, or the seeded draw of this trajectory index
    phi0: tuple[float, float] | None = None
    trajectory: int = 0
    # euler
    grid: int = 128
    axes: str = "21"
    # scan-fib
    fib_depth: int = 6
    scan_t_end: float = 1000.0
    # output directory
    out: str = "."

    def __post_init__(self):
        for f in fields(self):
            _validate(f.name, getattr(self, f.name))
        if self.phi0 is not None:
            object.__setattr__(self, "phi0", tuple(float(x) for x in self.phi0))
        if math.gcd(self.p, self.q) != 1:
            raise ConfigError("q", f"p and q must be coprime, got {self.p}/{self.q}")
        try:
            self.ensemble()
        except ValidationError as exc:
            raise ConfigError("(ensemble)", str(exc)) from exc

    # -- conversions ---------------------------------------------------

    def ensemble(self, **changes) -> EnsembleConfig:
        keys = {f.name for f in fields(EnsembleConfig)}
        base = {k: v for k, v in asdict(self).items() if k in keys}
        base.update(changes)
        return EnsembleConfig(**base)

    @property
    def axes_index(self) -> tuple[int, int]:
        """0-based ``(nu, mu)`` pair for the geometry routines."""
        return int(self.axes[0]) - 1, int(self.axes[1]) - 1

    def replace(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["phi0"] is not None:
            d["phi0"] = list(d["phi0"])
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("(root)", "configuration must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown key")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text, parse_constant=_reject_constant)
        except json.JSONDecodeError as exc:
            raise ConfigError("(root)", f"not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError("(file)", f"cannot read {path}: {exc.strerror}") from exc
        return cls.from_json(text)


def _reject_constant(name):
    raise ConfigError("(root)", f"non-finite constant {name} is not allowed")


_INT_FIELDS = {"p": 1, "q": 1, "n_traj": 2, "seed": 0, "stride": 1, "trajectory": 0, "grid": 2, "fib_depth": 1}
_POSITIVE = {"omega", "dt"}
_NON_NEGATIVE = {"t_end", "scan_t_end"}


def _is_int(v) -> bool:
    return isinstance(v, (int, np.integer)) and not isinstance(v, bool)


def _is_real(v) -> bool:
    return isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool)


def _validate(name: str, v) -> None:
    if name in _INT_FIELDS:
        if not _is_int(v):
            raise ConfigError(name, f"expected an integer, got {v!r}")
        if v < _INT_FIELDS[name]:
            raise ConfigError(name, f"must be >= {_INT_FIELDS[name]}, got {v}")
        if name == "seed" and v >= 2**64:
            raise ConfigError(name, "must fit in 64 bits")
        return
    if name == "phi0":
        if v is None:
            return
        if not isinstance(v, (list, tuple)) or len(v) != 2 or not all(_is_real(x) and math.isfinite(x) for x in v):
            raise ConfigError(name, f"expected null or two finite numbers, got {v!r}")
        return
    if name == "axes":
        if v not in ("12", "21"):
            raise ConfigError(name, f"expected \"12\" or \"21\", got {v!r}")
        return
    if name == "out":
        if not isinstance(v, str) or not v:
            raise ConfigError(name, "expected a non-empty path string")
        return
    if not _is_real(v) or not math.isfinite(v):
        raise ConfigError(name, f"expected a finite number, got {v!r}")
    if name in _POSITIVE and not v > 0:
        raise ConfigError(name, f"must be positive, got {v}")
    if name in _NON_NEGATIVE and v < 0:
        raise ConfigError(name, f"must be non-negative, got {v}")
    if name == "c" and not 0 <= v <= 1:
        raise ConfigError(name, f"must lie in [0, 1], got {v}")
    if name == "dphi" and not -math.pi < v <= math.pi:
        raise ConfigError(name, f"must lie in (-pi, pi], got {v}")
