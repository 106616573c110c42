"""Named figure presets shipped with the package as plain config files."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .config import ExperimentConfig, load_config
from .errors import ConfigError

PRESET_NAMES = ("fig2", "fig3", "figS1", "figS2", "figS3", "figS4")


def preset_path(name: str) -> Path:
    """Filesystem path of a packaged preset file."""
    if name not in PRESET_NAMES:
        raise ConfigError([f"preset: unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}"])
    return Path(resources.files("fourlevel") / "presets" / f"{name}.json")


def load_preset(name: str) -> ExperimentConfig:
    return load_config(preset_path(name))


def catalog() -> dict[str, ExperimentConfig]:
    """All presets, validated."""
    return {name: load_preset(name) for name in PRESET_NAMES}
