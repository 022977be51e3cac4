"""Run configuration: every tunable in one INI file, overridable from the CLI."""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .detect import DetectionConfig
from .errors import ConfigError
from .events import EnergyBand
from .svm import TrainConfig


@dataclass(frozen=True)
class EvalConfig:
    match_radius: int = 4
    bkg_group_radius: float = 20.0

    def __post_init__(self):
        if self.match_radius < 1:
            raise ConfigError("match_radius must be >= 1")
        if not self.bkg_group_radius > 0:
            raise ConfigError("bkg_group_radius must be > 0")


@dataclass(frozen=True)
class SamplingConfig:
    """How training positions are drawn from simulated scenes."""

    n_faint_bkg: int = 150
    n_bright_bkg: int = 30
    extended_radius: float = 12.0
    bright_threshold: float = 200.0

    def __post_init__(self):
        if self.n_faint_bkg < 0 or self.n_bright_bkg < 0:
            raise ConfigError("sample counts must be >= 0")
        if not (self.extended_radius > 0 and self.bright_threshold > 0):
            raise ConfigError("extended_radius and bright_threshold must be > 0")


@dataclass(frozen=True)
class RunConfig:
    detection: DetectionConfig = field(default_factory=DetectionConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    band: EnergyBand = field(default_factory=EnergyBand)
    eval: EvalConfig = field(default_factory=EvalConfig)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    seed: int = 0


SECTIONS = ("detection", "train", "band", "eval", "sampling")


def _convert(section: str, name: str, ftype, raw: str):
    try:
        if name == "gamma":
            return raw if raw.strip() == "auto" else float(raw)
        if ftype in (int, "int"):
            return int(raw)
        if ftype in (float, "float"):
            return float(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {name}: cannot parse {raw!r}") from None
    return raw


def option_fields():
    """Yield ``(section, field)`` for every leaf setting."""
    for sec in SECTIONS:
        cls = {f.name: f for f in dataclasses.fields(RunConfig)}[sec].default_factory
        for f in dataclasses.fields(cls):
            yield sec, f


def build(values: dict) -> RunConfig:
    """Construct a validated RunConfig from ``{section: {name: raw_value}}``."""
    base = RunConfig()
    parts = {}
    for sec in SECTIONS:
        current = getattr(base, sec)
        given = values.get(sec, {})
        known = {f.name: f for f in dataclasses.fields(current)}
        unknown = set(given) - set(known)
        if unknown:
            raise ConfigError(f"unknown setting(s) in [{sec}]: {', '.join(sorted(unknown))}")
        kwargs = {k: _convert(sec, k, known[k].type, v) if isinstance(v, str) else v
                  for k, v in given.items()}
        parts[sec] = dataclasses.replace(current, **kwargs)
    seed = values.get("run", {}).get("seed", base.seed)
    return RunConfig(**parts, seed=int(seed))


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    values: dict = {}
    if path is not None:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        if not cp.read(path):
            raise ConfigError(f"cannot read config file {path}")
        for sec in cp.sections():
            if sec not in SECTIONS and sec != "run":
                raise ConfigError(f"unknown config section [{sec}]")
            values[sec] = dict(cp[sec])
    for sec, kv in (overrides or {}).items():
        values.setdefault(sec, {}).update(kv)
    return build(values)


def dumps_config(cfg: RunConfig) -> str:
    lines = ["[run]", f"seed = {cfg.seed}", ""]
    for sec in SECTIONS:
        part = getattr(cfg, sec)
        lines.append(f"[{sec}]")
        for f in dataclasses.fields(part):
            value = getattr(part, f.name)
            lines.append(f"{f.name} = {value!r}" if isinstance(value, float) else
                         f"{f.name} = {value}")
        lines.append("")
    return "\n".join(lines)


def dump_config(cfg: RunConfig, path) -> None:
    Path(path).write_text(dumps_config(cfg))
