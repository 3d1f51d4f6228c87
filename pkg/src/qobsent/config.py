"""JSON run configuration for the command-line harness.

A config document looks like::

    {
      "experiment": "quench",
      "model": {"L": 16, "N": 4, "t": 1.0, "tp": 0.96, "V": 1.0, "Vp": 0.96,
                "density_shift": true},
      "bins": 4, "blocks": 4, "seed": 0,
      "entropies": ["S_xE", "S_FOE", "S_diag", "S_VN_half"],
      "degeneracy_tol": 1e-8,
      "output": "quench.csv", "cache_dir": null,
      "quench": {"pre_L": 8, "quench_time": 30, "t_max": 90, "dt": 0.25,
                 "beta": 1.0, "canonical_beta": "matched", "offset": 0}
    }

Only ``model.L`` and ``model.N`` are required; everything else has a
default. Unknown keys are rejected by name.
"""

from __future__ import annotations

import json
from dataclasses import MISSING, asdict, dataclass, field, fields
from typing import Any

from .errors import ConfigError
from .scenarios import COMPUTE_KINDS, QUENCH_KINDS, SWEEP_KINDS

EXPERIMENTS = ("quench", "sweep", "compute")
STATE_KINDS = ("thermal", "eigenstate", "superposition", "microcanonical")


@dataclass(frozen=True)
class ModelConfig:
    L: int
    N: int
    t: float = 1.0
    tp: float = 0.96
    V: float = 1.0
    Vp: float = 0.96
    density_shift: bool = True


@dataclass(frozen=True)
class QuenchConfig:
    pre_L: int | None = None
    quench_time: float = 30.0
    t_max: float = 90.0
    dt: float = 0.25
    schedule: tuple[float, ...] | None = None
    beta: float = 1.0
    canonical_beta: str = "matched"
    offset: int = 0


@dataclass(frozen=True)
class SweepConfig:
    k: int = 30
    kinds: tuple[str, ...] = SWEEP_KINDS
    centers: tuple[int, ...] | None = None


@dataclass(frozen=True)
class ComputeConfig:
    state: str = "thermal"
    beta: float = 1.0
    center: int = 0
    k: int = 30


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    model: ModelConfig
    bins: int = 4
    blocks: int = 4
    entropies: tuple[str, ...] | None = None
    seed: int = 0
    degeneracy_tol: float = 1e-8
    output: str | None = None
    cache_dir: str | None = None
    quench: QuenchConfig = field(default_factory=QuenchConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    compute: ComputeConfig = field(default_factory=ComputeConfig)

    @property
    def entropy_kinds(self) -> tuple[str, ...]:
        if self.entropies is not None:
            return self.entropies
        return QUENCH_KINDS if self.experiment == "quench" else ("S_xE", "S_FOE", "S_diag", "S_DOS")

    def to_dict(self) -> dict:
        def plain(x):
            if isinstance(x, tuple):
                return [plain(v) for v in x]
            if isinstance(x, dict):
                return {k: plain(v) for k, v in x.items()}
            return x
        return plain(asdict(self))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


_TYPES = {int: "an integer", float: "a number", bool: "a boolean", str: "a string"}


def _coerce(value, kind, key):
    if kind is bool:
        if isinstance(value, bool):
            return value
    elif kind is int:
        if isinstance(value, int) and not isinstance(value, bool):
            return value
    elif kind is float:
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
    elif kind is str:
        if isinstance(value, str):
            return value
    raise ConfigError(f"{key}: expected {_TYPES[kind]}, got {value!r}")


def _list_of(value, kind, key):
    if not isinstance(value, list):
        raise ConfigError(f"{key}: expected a list, got {value!r}")
    return tuple(_coerce(v, kind, f"{key}[{i}]") for i, v in enumerate(value))


# per-section field types; '?' marks nullable, '[]' marks lists
_SCHEMA = {
    ModelConfig: {"L": int, "N": int, "t": float, "tp": float, "V": float, "Vp": float, "density_shift": bool},
    QuenchConfig: {"pre_L": (int, "?"), "quench_time": float, "t_max": float, "dt": float,
                   "schedule": (float, "[]?"), "beta": float, "canonical_beta": str, "offset": int},
    SweepConfig: {"k": int, "kinds": (str, "[]"), "centers": (int, "[]?")},
    ComputeConfig: {"state": str, "beta": float, "center": int, "k": int},
}
_TOP = {"experiment": str, "bins": int, "blocks": int, "entropies": (str, "[]?"), "seed": int,
        "degeneracy_tol": float, "output": (str, "?"), "cache_dir": (str, "?")}
_SECTIONS = {"model": ModelConfig, "quench": QuenchConfig, "sweep": SweepConfig, "compute": ComputeConfig}


def _read_fields(data: dict, schema: dict, prefix: str) -> dict:
    out = {}
    for key, value in data.items():
        path = f"{prefix}{key}"
        if key not in schema:
            raise ConfigError(f"unknown key {path!r}")
        spec = schema[key]
        kind, mods = spec if isinstance(spec, tuple) else (spec, "")
        if value is None:
            if "?" not in mods:
                raise ConfigError(f"{path}: must not be null")
            out[key] = None
        elif "[]" in mods:
            out[key] = _list_of(value, kind, path)
        else:
            out[key] = _coerce(value, kind, path)
    return out


def _section(data, cls, name):
    if not isinstance(data, dict):
        raise ConfigError(f"{name}: expected an object")
    values = _read_fields(data, _SCHEMA[cls], f"{name}.")
    required = [f.name for f in fields(cls) if f.default is MISSING and f.default_factory is MISSING]
    for req in required:
        if req not in values:
            raise ConfigError(f"missing required key '{name}.{req}'")
    return cls(**values)


def from_dict(data: Any, experiment: str | None = None) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config document must be a JSON object")
    top = {}
    sections = {}
    for key, value in data.items():
        if key in _SECTIONS:
            sections[key] = value
        else:
            top[key] = value
    values = _read_fields(top, _TOP, "")
    if "model" not in sections:
        raise ConfigError("missing required key 'model'")
    for name, cls in _SECTIONS.items():
        if name in sections:
            values[name] = _section(sections[name], cls, name)

    declared = values.get("experiment")
    if experiment is not None and declared is not None and declared != experiment:
        raise ConfigError(f"experiment: config says {declared!r} but command is {experiment!r}")
    values["experiment"] = declared or experiment
    if values["experiment"] is None:
        raise ConfigError("missing required key 'experiment'")
    cfg = RunConfig(**values)
    validate(cfg)
    return cfg


def parse_config(text: str, experiment: str | None = None) -> RunConfig:
    """Parse and validate a JSON config document."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return from_dict(data, experiment)


def validate(cfg: RunConfig) -> None:
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment: must be one of {EXPERIMENTS}, got {cfg.experiment!r}")
    m = cfg.model
    if not 0 < m.L <= 64:
        raise ConfigError(f"model.L: must be in 1..64, got {m.L}")
    if not 0 <= m.N <= m.L:
        raise ConfigError(f"model.N: must satisfy 0 <= N <= L, got {m.N}")
    if cfg.bins <= 0 or m.L % cfg.bins:
        raise ConfigError(f"bins: {cfg.bins} bins must divide L={m.L}")
    if cfg.blocks <= 0 or m.L % cfg.blocks:
        raise ConfigError(f"blocks: {cfg.blocks} blocks must divide L={m.L}")
    if cfg.degeneracy_tol < 0:
        raise ConfigError("degeneracy_tol: must be non-negative")
    allowed = {"quench": QUENCH_KINDS, "compute": COMPUTE_KINDS, "sweep": ("S_xE", "S_FOE", "S_DOS")}[cfg.experiment]
    for kind in cfg.entropies or ():
        if kind not in allowed:
            raise ConfigError(f"entropies: {kind!r} is not available for {cfg.experiment} (choose from {allowed})")
    q = cfg.quench
    pre_L = m.L // 2 if q.pre_L is None else q.pre_L
    if not m.N <= pre_L <= m.L or pre_L + q.offset > m.L or q.offset < 0:
        raise ConfigError(f"quench.pre_L: box of {pre_L} sites at offset {q.offset} does not fit N={m.N}, L={m.L}")
    if q.dt <= 0 or q.t_max < 0:
        raise ConfigError("quench.dt and quench.t_max must be positive")
    if q.canonical_beta not in ("matched", "initial"):
        raise ConfigError("quench.canonical_beta: must be 'matched' or 'initial'")
    s = cfg.sweep
    if s.k < 1:
        raise ConfigError("sweep.k: must be positive")
    for kind in s.kinds:
        if kind not in SWEEP_KINDS:
            raise ConfigError(f"sweep.kinds: unknown state kind {kind!r}")
    if cfg.compute.state not in STATE_KINDS:
        raise ConfigError(f"compute.state: must be one of {STATE_KINDS}")
