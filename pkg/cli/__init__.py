"""Command-line interface: settings files and the typer application."""

from .settings import (
    EngineSettings,
    RunSettings,
    defaults_from_config,
    settings_from_dict,
    load_settings,
    dump_settings,
)
from .app import app


__all__ = [
    "EngineSettings",
    "RunSettings",
    "defaults_from_config",
    "settings_from_dict",
    "load_settings",
    "dump_settings",
    "app",
]
