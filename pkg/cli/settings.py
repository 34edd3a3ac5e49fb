"""
Declarative run settings.

A config file (YAML or JSON) may carry the top-level sections ``source``,
``noise``, ``layout`` and ``engine``. Anything it leaves out comes from the
environment configuration in config.py. Unknown keys are errors.
"""

import logging
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional, Union

import orjson
import yaml

from config import Config
from core.errors import ConfigError, DomainError
from network import BUILTIN_LAYOUTS, ExperimentLayout, layout_from_dict, layout_to_dict, load_layout
from network.results import Method
from noise import NoiseModel, create_noise_model_from_config
from sources import EmissionModel, SourceModel, create_source_model_from_config


logger = logging.getLogger(__name__)

SECTIONS = ("source", "noise", "layout", "engine")
LAYOUT_ROLES = ("repeater", "baseline")


@dataclass(frozen=True)
class EngineSettings:
    method: str = Method.ENUMERATE.value
    trials: int = 1_000_000
    seed: int = 20190101
    workers: int = 4
    block_size: int = 65536
    budget: int = 100_000_000

    def __post_init__(self):
        if self.method not in {m.value for m in Method}:
            raise ConfigError(f"engine.method must be enumerate or sample (got {self.method})")
        for name in ("trials", "workers", "block_size", "budget"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"engine.{name} must be >= 1")
        if int(self.seed) < 0:
            raise ConfigError("engine.seed must be non-negative")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class RunSettings:
    """Resolved physics and engine settings for one command."""
    source: SourceModel
    noise: NoiseModel
    repeater: ExperimentLayout
    baseline: ExperimentLayout
    engine: EngineSettings
    layout_refs: tuple = ("all-photonic", "conventional")

    def with_engine(self, **changes) -> "RunSettings":
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, engine=replace(self.engine, **changes)) if changes else self

    def at_theory_conditions(self) -> "RunSettings":
        """Lossless detection and one pair per source, where the closed-form ratio is exact."""
        noise = replace(self.noise, efficiency=1.0, ghz_lossless=False, photon_efficiency={},
                        include_multi_pair=False)
        return replace(self, noise=noise)

    def theory_comparable(self) -> bool:
        n = self.noise
        lossless = n.efficiency == 1.0 and all(eta == 1.0 for eta in n.photon_efficiency.values())
        return lossless and not n.include_multi_pair

    def to_dict(self, include_workers: bool = True) -> dict:
        """Resolved settings; thread count left out when it cannot change results."""
        layouts = {}
        for role, ref, layout in zip(LAYOUT_ROLES, self.layout_refs, (self.repeater, self.baseline)):
            layouts[role] = ref if isinstance(ref, str) and ref in BUILTIN_LAYOUTS else layout_to_dict(layout)
        return {
            "source": {
                "p": self.source.p,
                "max_pairs": self.source.max_pairs,
                "pulse_rate": self.source.pulse_rate,
                "efficiency": self.source.efficiency,
                "emission": self.source.emission.value,
            },
            "noise": self.noise.to_dict(),
            "layout": layouts,
            "engine": {k: v for k, v in self.engine.to_dict().items() if include_workers or k != "workers"},
        }


def _engine_from_config(config: Config) -> EngineSettings:
    return EngineSettings(
        method=Method.ENUMERATE.value,
        trials=config.SAMPLE_TRIALS,
        seed=config.SEED,
        workers=config.WORKERS,
        block_size=config.SAMPLE_BLOCK_SIZE,
        budget=config.ENUMERATION_BUDGET,
    )


def defaults_from_config(config: Config) -> RunSettings:
    return RunSettings(
        source=create_source_model_from_config(config),
        noise=create_noise_model_from_config(config),
        repeater=load_layout("all-photonic"),
        baseline=load_layout("conventional"),
        engine=_engine_from_config(config),
    )


def _check_keys(section: str, data: dict, allowed) -> None:
    unknown = set(data) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in '{section}': {sorted(unknown)}")


def _resolve_layout(ref: Union[str, dict]) -> ExperimentLayout:
    if isinstance(ref, dict):
        return layout_from_dict(ref)
    if isinstance(ref, str):
        return load_layout(ref)
    raise ConfigError(f"layout entries must be a name, a path or a mapping (got {type(ref).__name__})")


def settings_from_dict(data: Optional[dict], config: Config) -> RunSettings:
    """Overlay a parsed config document on the environment defaults."""
    base = defaults_from_config(config)
    if not data:
        return base
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a mapping")
    _check_keys("top level", data, SECTIONS)

    try:
        source_data = data.get("source") or {}
        _check_keys("source", source_data, ("p", "max_pairs", "pulse_rate", "efficiency", "emission"))
        if "emission" in source_data:
            source_data = {**source_data, "emission": EmissionModel(source_data["emission"])}
        source = replace(base.source, **source_data)

        noise_data = data.get("noise") or {}
        noise = NoiseModel.from_dict({**base.noise.to_dict(), **noise_data}) if noise_data else base.noise

        engine_data = data.get("engine") or {}
        _check_keys("engine", engine_data, [f.name for f in fields(EngineSettings)])
        engine = replace(base.engine, **engine_data)
    except (DomainError, ValueError, TypeError) as e:
        raise ConfigError(str(e)) from e

    layout_data = data.get("layout") or {}
    if not isinstance(layout_data, dict):
        raise ConfigError("'layout' must map repeater/baseline to layouts")
    _check_keys("layout", layout_data, LAYOUT_ROLES)
    refs = (layout_data.get("repeater", base.layout_refs[0]), layout_data.get("baseline", base.layout_refs[1]))
    repeater, baseline = (_resolve_layout(r) for r in refs)

    return RunSettings(source, noise, repeater, baseline, engine, refs)


def load_settings(path: Optional[Union[str, Path]], config: Config) -> RunSettings:
    if path is None:
        return defaults_from_config(config)
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} not found")
    text = path.read_text()
    try:
        data = orjson.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (orjson.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot parse config file {path}: {e}") from e
    settings = settings_from_dict(data, config)
    logger.info(f"Loaded settings from {path}")
    return settings


def dump_settings(settings: RunSettings, fmt: str = "yaml") -> str:
    data = settings.to_dict()
    if fmt == "json":
        return orjson.dumps(data, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS).decode()
    return yaml.safe_dump(data, sort_keys=False)
