"""Time-dependent scalar parameters.

Every schedule is a frozen dataclass with ``__call__(t) -> float`` so configs
compare by value and stay picklable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class Constant:
    value: float

    def __call__(self, t: float) -> float:
        return float(self.value)


@dataclass(frozen=True)
class InverseSqrt:
    """``a / sqrt(1 + b t)``."""

    a: float = 1.0
    b: float = 1.0

    def __call__(self, t: float) -> float:
        return self.a / math.sqrt(1.0 + self.b * t)


@dataclass(frozen=True)
class PowerLaw:
    """``a * (1 + b t) ** p``."""

    a: float = 1.0
    b: float = 1.0
    p: float = -0.5

    def __call__(self, t: float) -> float:
        return self.a * (1.0 + self.b * t) ** self.p


@dataclass(frozen=True)
class Sinusoid:
    """``offset + amplitude * sin(freq * t + phase)``."""

    offset: float = 0.0
    amplitude: float = 1.0
    freq: float = 1.0
    phase: float = 0.0

    def __call__(self, t: float) -> float:
        return self.offset + self.amplitude * math.sin(self.freq * t + self.phase)


@dataclass(frozen=True)
class Table:
    """Piecewise-linear interpolation through ``(t, v)`` samples, held flat outside."""

    t: tuple = field(default=())
    v: tuple = field(default=())

    def __post_init__(self):
        ts, vs = tuple(float(x) for x in self.t), tuple(float(x) for x in self.v)
        if len(ts) < 2 or len(ts) != len(vs):
            raise ConfigError("table schedule needs >= 2 matching t/v samples")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ConfigError("table schedule times must be strictly increasing")
        object.__setattr__(self, "t", ts)
        object.__setattr__(self, "v", vs)

    def __call__(self, t: float) -> float:
        return float(np.interp(t, self.t, self.v))


_KINDS = {
    "constant": Constant,
    "inverse_sqrt": InverseSqrt,
    "power_law": PowerLaw,
    "sinusoid": Sinusoid,
    "table": Table,
}


def parse_schedule(spec, name: str = "schedule"):
    """Build a schedule from a number or a ``{"kind": ..., **params}`` mapping."""
    if isinstance(spec, bool):
        raise ConfigError(f"{name}: booleans are not schedules")
    if isinstance(spec, (int, float)):
        return Constant(float(spec))
    if callable(spec):
        return spec
    if not isinstance(spec, dict):
        raise ConfigError(f"{name}: expected a number or a table, got {type(spec).__name__}")
    params = dict(spec)
    kind = params.pop("kind", None)
    if kind not in _KINDS:
        raise ConfigError(f"{name}: unknown schedule kind {kind!r}; choose from {sorted(_KINDS)}")
    try:
        return _KINDS[kind](**params)
    except TypeError as exc:
        raise ConfigError(f"{name}: {exc}") from None
