"""Settings for heytingkit scans.

Settings are resolved from, lowest to highest precedence: the dataclass
defaults, a JSON config file in the platform config directory, and
``HEYTINGKIT_*`` environment variables. The CLI applies its own flags on top.

Usage:
    from heytingkit.config import load_settings

    settings = load_settings()
    settings.depth  # 3 unless overridden
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any

import platformdirs

from .exceptions import ConfigError

# Application name for platformdirs paths
APP_NAME = "heytingkit"

# Environment variable per integer setting
ENV_VARS = {
    "depth": "HEYTINGKIT_DEPTH",
    "term_depth": "HEYTINGKIT_TERM_DEPTH",
    "scan_arity": "HEYTINGKIT_SCAN_ARITY",
    "max_enumeration": "HEYTINGKIT_MAX_ENUMERATION",
    "seed": "HEYTINGKIT_SEED",
}


@dataclass(frozen=True)
class Settings:
    """Bounds and switches shared by every scan."""

    depth: int = 3
    term_depth: int = 2
    scan_arity: int = 1
    max_enumeration: int = 200_000
    seed: int = 0
    verify: bool = False

    def __post_init__(self) -> None:
        for name in ("depth", "term_depth", "scan_arity"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative, got {getattr(self, name)}")
        if self.max_enumeration < 1:
            raise ConfigError(f"max_enumeration must be positive, got {self.max_enumeration}")

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Settings:
        """Create Settings from a dictionary, ignoring unknown keys."""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown setting(s): {', '.join(unknown)}")
        try:
            values = {
                k: (bool(v) if k == "verify" else int(v)) for k, v in data.items() if k in known
            }
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid setting value: {e}") from e
        return cls(**values)

    def override(self, **changes: Any) -> Settings:
        """Return a copy with the non-None ``changes`` applied."""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


DEFAULT_SETTINGS = Settings()


def get_config_path() -> Path:
    """Get the standard config.json location.

    Returns:
        Path to ~/.config/heytingkit/config.json (or platform equivalent).
    """
    config_dir = platformdirs.user_config_dir(APP_NAME)
    return Path(config_dir) / "config.json"


def load_settings(path: str | Path | None = None) -> Settings:
    """Resolve settings from defaults, the config file and the environment.

    Args:
        path: Config file to read. Defaults to ``get_config_path()``; a
            missing file is not an error.

    Returns:
        The resolved Settings.

    Raises:
        ConfigError: If the file or an environment variable holds an invalid value.
    """
    config_path = Path(path) if path is not None else get_config_path()
    data: dict[str, Any] = {}

    if config_path.exists():
        try:
            data = json.loads(config_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ConfigError(f"Invalid JSON in {config_path}: {e}") from e
        except OSError as e:
            raise ConfigError(f"Failed to read {config_path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"{config_path} must contain a JSON object")

    for name, var in ENV_VARS.items():
        raw = os.environ.get(var)
        if raw is None or not raw.strip():
            continue
        try:
            data[name] = int(raw)
        except ValueError as e:
            raise ConfigError(f"{var} must be an integer, got {raw!r}") from e

    return Settings.from_dict(data)


def save_settings(settings: Settings, path: str | Path | None = None) -> Path:
    """Write settings to the config file.

    Args:
        settings: Settings to persist.
        path: Destination. Defaults to ``get_config_path()``.

    Returns:
        Path where the file was written.

    Raises:
        ConfigError: If the file cannot be written.
    """
    dest = Path(path) if path is not None else get_config_path()
    try:
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_text(json.dumps(settings.to_dict(), indent=2), encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Failed to write config to {dest}: {e}") from e
    return dest
