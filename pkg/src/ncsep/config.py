"""Experiment configuration documents (JSON or TOML).

Example (TOML)::

    [nc]
    theta = { kind = "inverse_sqrt", a = 1.0, b = 1.0 }
    eta = 0.0
    hbar = 1.0

    [oscillator]
    m1 = 1.0
    m2 = 4.0
    w1 = 1.0
    w2 = 1.0

    [drive]
    e1 = 0.0
    e2 = 0.0

    [state]
    n = [0, 0]
    convention = "paper"
    beta0 = [[0.0, 0.0], [0.0, 0.0]]

    [sweep]
    t_start = 0.0
    t_end = 400.0
    t_step = 0.5

    [output]
    format = "csv"
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from .canonical import OscillatorConfig
from .covariance import CONVENTIONS
from .errors import ConfigError, NCSepError
from .schedules import parse_schedule

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

_SECTIONS = {
    "nc": {"theta", "eta", "hbar"},
    "oscillator": {"m1", "m2", "w1", "w2"},
    "drive": {"e1", "e2"},
    "state": {"n", "convention", "beta0"},
    "sweep": {"t_start", "t_end", "t_step", "refine_tol", "closed_form"},
    "output": {"format", "path"},
    "dynamics": {"t_end", "tol", "n_points"},
}


@dataclass(frozen=True)
class SweepSpec:
    t_start: float = 0.0
    t_end: float = 0.0
    t_step: float = 1.0
    refine_tol: float = 1e-3
    closed_form: str = "auto"


@dataclass(frozen=True)
class DynamicsSpec:
    t_end: float = 10.0
    tol: float = 1e-10
    n_points: int = 2001


@dataclass(frozen=True)
class ExperimentConfig:
    oscillator: OscillatorConfig = field(default_factory=OscillatorConfig)
    n: tuple = (0, 0)
    convention: str = "physical"
    beta0: tuple = (0j, 0j)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    dynamics: DynamicsSpec = field(default_factory=DynamicsSpec)
    output_format: str = "csv"
    output_path: str | None = None

    def with_overrides(self, **kw):
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def _number(section, key, value, *, positive=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"[{section}] {key} must be a number")
    if integer and int(value) != value:
        raise ConfigError(f"[{section}] {key} must be an integer")
    if positive and not value > 0:
        raise ConfigError(f"[{section}] {key} must be positive")
    return int(value) if integer else float(value)


def parse_occupation(value) -> tuple[int, int]:
    """``"n1,n2"`` or a two-element sequence of non-negative integers."""
    if isinstance(value, str):
        value = value.split(",")
    try:
        n1, n2 = (int(str(v).strip()) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(f"state must be two integers, got {value!r}") from None
    if n1 < 0 or n2 < 0:
        raise ConfigError("occupation numbers must be non-negative")
    return n1, n2


def _complex(value, key):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ConfigError(f"[state] {key} entries must be numbers or [re, im] pairs")


def config_from_dict(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a table/object at the top level")
    for name, body in doc.items():
        if name not in _SECTIONS:
            raise ConfigError(f"unknown section [{name}]")
        if not isinstance(body, dict):
            raise ConfigError(f"[{name}] must be a table")
        extra = set(body) - _SECTIONS[name]
        if extra:
            raise ConfigError(f"[{name}] unknown keys: {sorted(extra)}")

    nc = doc.get("nc", {})
    sched = {}
    for section, keys in (("nc", ("theta", "eta")), ("oscillator", ("m1", "m2", "w1", "w2")),
                          ("drive", ("e1", "e2"))):
        body = doc.get(section, {})
        for k in keys:
            if k in body:
                sched[k] = parse_schedule(body[k], f"[{section}] {k}")
    hbar = _number("nc", "hbar", nc.get("hbar", 1.0), positive=True)
    try:
        oscillator = OscillatorConfig(hbar=hbar, **sched)
    except NCSepError as exc:
        raise ConfigError(str(exc)) from None

    state = doc.get("state", {})
    n = parse_occupation(state.get("n", (0, 0)))
    convention = state.get("convention", "physical")
    if convention not in CONVENTIONS:
        raise ConfigError(f"[state] convention must be one of {CONVENTIONS}")
    beta0 = state.get("beta0", (0.0, 0.0))
    if not isinstance(beta0, (list, tuple)) or len(beta0) != 2:
        raise ConfigError("[state] beta0 must have two entries")
    beta0 = tuple(_complex(b, "beta0") for b in beta0)

    sw = doc.get("sweep", {})
    spec = SweepSpec(
        t_start=_number("sweep", "t_start", sw.get("t_start", 0.0)),
        t_end=_number("sweep", "t_end", sw.get("t_end", sw.get("t_start", 0.0))),
        t_step=_number("sweep", "t_step", sw.get("t_step", 1.0), positive=True),
        refine_tol=_number("sweep", "refine_tol", sw.get("refine_tol", 1e-3), positive=True),
        closed_form=sw.get("closed_form", "auto"),
    )
    if spec.closed_form not in ("auto", "toy", "none"):
        raise ConfigError("[sweep] closed_form must be 'auto', 'toy' or 'none'")
    if spec.t_start < 0:
        raise ConfigError("[sweep] t_start must be non-negative")
    # schedules are lazy; catch out-of-domain values before any run starts
    for t in sorted({0.0, spec.t_start, max(spec.t_start, spec.t_end)}):
        try:
            oscillator.at(t)
        except (NCSepError, ValueError, ArithmeticError) as exc:
            raise ConfigError(f"parameters invalid at t={t:g}: {exc}") from None

    dy = doc.get("dynamics", {})
    dyn = DynamicsSpec(
        t_end=_number("dynamics", "t_end", dy.get("t_end", 10.0), positive=True),
        tol=_number("dynamics", "tol", dy.get("tol", 1e-10), positive=True),
        n_points=_number("dynamics", "n_points", dy.get("n_points", 2001), positive=True, integer=True),
    )

    out = doc.get("output", {})
    fmt = out.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError("[output] format must be 'csv' or 'json'")
    return ExperimentConfig(oscillator, n, convention, beta0, spec, dyn, fmt, out.get("path"))


def load_config(path) -> ExperimentConfig:
    """Read a ``.json`` or ``.toml`` configuration file."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    try:
        if path.suffix.lower() == ".json":
            doc = json.loads(raw)
        elif path.suffix.lower() == ".toml":
            doc = tomllib.loads(raw.decode())
        else:
            try:
                doc = json.loads(raw)
            except ValueError:
                doc = tomllib.loads(raw.decode())
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    return config_from_dict(doc)
