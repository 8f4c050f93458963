"""Experiment configuration: flat key-value files with typed validation.

Configs are TOML files (sections allowed purely for readability; keys are
flattened and must be globally unique) or JSON files; a JSON file holding a
``config`` key (the meta.json this package writes) is unwrapped, so any run's
metadata can be re-fed as its own config. Unknown keys are rejected.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .errors import ConfigError

EXPERIMENTS = (
    "spectrum",
    "winding",
    "winding-map",
    "evolve-ct",
    "evolve-qw",
    "fig1",
    "fig2",
    "fig3",
    "fig4",
)

_CHOICES = {
    "experiment": EXPERIMENTS,
    "alpha_mode": ("rational_approximant", "irrational"),
    "operator": ("hamiltonian", "walk"),
    "loop": ("u", "v"),
    "nu": ("theta", "phi"),
    "variant": ("a", "b", "c", "all"),
}


@dataclass
class ExperimentConfig:
    """Complete, validated description of one experiment run."""

    experiment: str = "spectrum"
    # model
    L: int = 377
    kappa: float = 1.0
    h: float = 0.0
    theta: float = 0.0
    phi: float = 0.0
    epsilon: float = 0.0
    V1: float = 0.0
    V2: float = 0.0
    alpha_mode: str = "rational_approximant"
    beta: float = 0.9 * math.pi / 2.0
    loop: str = "u"
    n0: int = -1  # -1 means the lattice center L//2
    operator: str = "hamiltonian"
    # numerics
    tol_eig: float = 1e-8
    im_tol: float = -1.0  # negative means auto: 1e-6 * ||M||_F
    ipr_threshold: float = -1.0  # negative means auto: 10 / dimension
    initial_samples: int = 256
    max_refinements: int = 16
    nu: str = "theta"
    eb_re: float = 0.0
    eb_im: float = 0.0
    eb_auto: bool = False
    eb_re_min: float = -3.0
    eb_re_max: float = 3.0
    eb_re_n: int = 9
    eb_im_min: float = -1.0
    eb_im_max: float = 1.0
    eb_im_n: int = 7
    t_max: float = 80.0
    t_samples: int = 161
    t_log: bool = False
    t_min: float = 0.1
    steps: int = 100
    fit_lo: float = -1.0  # negative disables the transport fit
    fit_hi: float = -1.0
    wrap_tol: float = 1e-3
    variant: str = "all"
    # output
    out: str = "out"
    formats: list = field(default_factory=lambda: ["csv", "json", "svg"])
    seed: int = 0  # reserved; every computation is deterministic

    def __post_init__(self):
        for key, choices in _CHOICES.items():
            value = getattr(self, key)
            if value not in choices:
                raise ConfigError(f"{key} must be one of {choices}, got {value!r}")
        bad = set(self.formats) - {"csv", "json", "svg"}
        if bad:
            raise ConfigError(f"unknown output formats: {sorted(bad)}")
        if self.initial_samples < 8:
            raise ConfigError("initial_samples must be >= 8")
        if self.t_samples < 2:
            raise ConfigError("t_samples must be >= 2")
        if self.steps < 0:
            raise ConfigError("steps must be >= 0")
        if self.tol_eig <= 0:
            raise ConfigError("tol_eig must be positive")

    def site(self) -> int:
        return self.L // 2 if self.n0 < 0 else self.n0

    def to_dict(self) -> dict:
        return asdict(self)


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _coerce(key: str, value, from_text: bool):
    kind = _FIELD_TYPES[key]
    try:
        if kind == "int":
            if isinstance(value, bool):
                raise ValueError
            return int(value)
        if kind == "float":
            if isinstance(value, bool):
                raise ValueError
            return float(value)
        if kind == "bool":
            if isinstance(value, bool):
                return value
            if from_text and isinstance(value, str):
                low = value.lower()
                if low in ("true", "1", "yes"):
                    return True
                if low in ("false", "0", "no"):
                    return False
            raise ValueError
        if kind == "list":
            if isinstance(value, str):
                return [item.strip() for item in value.split(",") if item.strip()]
            return list(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"invalid value for {key}: {value!r}") from None


def build_config(data: dict | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Assemble a config from file data plus CLI overrides (overrides win).

    File values arrive typed (TOML/JSON); override values arrive as text.
    """
    merged: dict = {}
    for source, from_text in ((data or {}, False), (overrides or {}, True)):
        for key, value in source.items():
            if key not in _FIELD_TYPES:
                raise ConfigError(f"unknown configuration key: {key!r}")
            merged[key] = _coerce(key, value, from_text)
    return ExperimentConfig(**merged)


def _flatten(raw: dict, path: str) -> dict:
    flat: dict = {}
    for key, value in raw.items():
        if isinstance(value, dict):
            for inner, item in value.items():
                if isinstance(item, dict):
                    raise ConfigError(f"{path}: nested section [{key}.{inner}] not allowed")
                if inner in flat:
                    raise ConfigError(f"{path}: duplicate key {inner!r} across sections")
                flat[inner] = item
        else:
            if key in flat:
                raise ConfigError(f"{path}: duplicate key {key!r} across sections")
            flat[key] = value
    return flat


def load_config_file(path: str | Path) -> dict:
    """Read a TOML (or JSON / meta.json) config file into a flat dict."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    if path.suffix == ".json":
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be an object")
        if "config" in raw and isinstance(raw["config"], dict):
            raw = raw["config"]
        return _flatten(raw, str(path))
    try:
        raw = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML ({exc})") from exc
    return _flatten(raw, str(path))
