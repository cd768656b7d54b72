"""Run configuration: a flat TOML file plus ``SPDSIGNAL_*`` environment overrides.

Relative input paths are resolved against the directory of the config file.
Every key is optional; see :class:`RunConfig` for the defaults.
"""
from __future__ import annotations

import dataclasses
import math
import os
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Optional, Tuple

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .gar.evaluate import EvalConfig
from .gar.fitting import SkewTBox
from .moments import ExtremeTailRule
from .signal import NormScheme
from .spd import TailPolicy

ENV_PREFIX = "SPDSIGNAL_"
PATH_KEYS = ("spd_path", "gdp_path", "nfci_path")


@dataclass(frozen=True)
class RunConfig:
    spd_path: Optional[Path] = None
    gdp_path: Optional[Path] = None
    nfci_path: Optional[Path] = None
    # survey side
    target: float = 2.0
    spd_horizon: Optional[str] = None
    variable: Optional[str] = None
    tail_width: Optional[float] = None
    tail_threshold: float = 0.25
    tail_rule: bool = True
    include_kelly: bool = False
    skew: str = "bowley"
    aggregation: str = "mean"
    normalization: str = "full"
    norm_window: int = 8
    spf_aggregation: str = "mean"
    # macro inputs
    gdp_aggregate: Optional[str] = None
    nfci_aggregate: Optional[str] = "last"
    # growth-at-risk evaluation
    horizon: int = 1
    eval_scheme: str = "expanding"
    initial_fraction: float = 0.6
    eval_window: Optional[int] = None
    min_eval_periods: int = 20
    shape_bounds: Tuple[float, float] = (-10.0, 10.0)
    dof_bounds: Tuple[float, float] = (2.0, 100.0)
    ls_cap: float = 1e3
    crps_k: float = 12.0
    out_dir: Path = field(default=Path("out"))
    seed: int = 0

    def __post_init__(self):
        if not math.isfinite(self.target):
            raise ConfigError("target must be finite")
        if self.skew not in ("bowley", "kelly", "pearson_mode_skew"):
            raise ConfigError(f"unknown skewness measure {self.skew!r}")
        if self.skew == "kelly" and not self.include_kelly:
            raise ConfigError("skew = 'kelly' needs include_kelly = true")
        if self.horizon < 1:
            raise ConfigError("horizon must be at least one quarter")
        for key in PATH_KEYS:
            p = getattr(self, key)
            if p is not None and not Path(p).is_file():
                raise ConfigError(f"{key}: no such file {p}")
        # build the derived objects once so bad values fail at load time
        try:
            self.tail_policy, self.tail_rule_obj, self.norm_scheme, self.eval_config
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from None

    @property
    def tail_policy(self) -> TailPolicy:
        return TailPolicy(self.tail_width)

    @property
    def tail_rule_obj(self) -> ExtremeTailRule:
        return ExtremeTailRule(threshold=self.tail_threshold, enabled=self.tail_rule)

    @property
    def norm_scheme(self) -> NormScheme:
        return NormScheme(self.normalization, self.norm_window)

    @property
    def eval_config(self) -> EvalConfig:
        return EvalConfig(
            scheme=self.eval_scheme,
            initial_fraction=self.initial_fraction,
            window=self.eval_window,
            min_eval_periods=self.min_eval_periods,
            box=SkewTBox(tuple(self.shape_bounds), tuple(self.dof_bounds)),
            seed=self.seed,
            ls_cap=self.ls_cap,
            crps_k=self.crps_k,
        )

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _coerce(name: str, value: Any, from_env: bool = False):
    """Convert a TOML or environment value to the type of field ``name``."""
    kind = str(_FIELDS[name].type)
    if from_env and isinstance(value, str):
        text = value.strip()
        if "Optional" in kind and text.lower() in ("", "none", "null"):
            return None
        if "Tuple" in kind:
            value = [float(v) for v in text.strip("()[]").split(",")]
        elif "bool" in kind:
            if text.lower() not in ("1", "0", "true", "false", "yes", "no"):
                raise ConfigError(f"{name}: cannot read {value!r} as a boolean")
            value = text.lower() in ("1", "true", "yes")
        elif "int" in kind:
            value = int(text)
        elif "float" in kind:
            value = float(text)
    if value is None:
        return None
    if "Path" in kind:
        return Path(value)
    if "Tuple" in kind:
        if len(value) != 2:
            raise ConfigError(f"{name}: expected two bounds, got {value!r}")
        return (float(value[0]), float(value[1]))
    if "bool" in kind:
        if not isinstance(value, bool):
            raise ConfigError(f"{name}: expected true/false, got {value!r}")
        return value
    if "int" in kind:
        if isinstance(value, bool) or int(value) != value:
            raise ConfigError(f"{name}: expected an integer, got {value!r}")
        return int(value)
    if "float" in kind:
        return float(value)
    return str(value)


def load_config(path=None, env: Mapping[str, str] | None = None, **overrides) -> RunConfig:
    """Read ``path`` (TOML), apply ``SPDSIGNAL_<KEY>`` variables, then ``overrides``.

    Without ``path`` the bundled synthetic replication config is used.
    """
    path = Path(path) if path is not None else bundled_config()
    try:
        with path.open("rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    values = {}
    for key, value in raw.items():
        if key not in _FIELDS:
            raise ConfigError(f"{path}: unknown key {key!r}")
        try:
            values[key] = _coerce(key, value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: {key}: {exc}") from None
    env = os.environ if env is None else env
    for name, value in env.items():
        if not name.startswith(ENV_PREFIX):
            continue
        key = name[len(ENV_PREFIX):].lower()
        if key not in _FIELDS:
            raise ConfigError(f"environment variable {name} names no config key")
        try:
            values[key] = _coerce(key, value, from_env=True)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{name}: {exc}") from None
    values.update({k: v for k, v in overrides.items() if v is not None})
    base = path.parent
    for key in PATH_KEYS + ("out_dir",):
        p = values.get(key)
        if p is not None and not Path(p).is_absolute():
            values[key] = base / p if key != "out_dir" else Path(p)
    return RunConfig(**values)


def data_dir() -> Path:
    return Path(str(resources.files("spdsignal") / "data"))


def bundled_config() -> Path:
    return data_dir() / "replicate.toml"
