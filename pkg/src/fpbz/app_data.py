"""
Configuration for the FPBZ codec pipeline.

Settings come from three places, later ones winning:
- built-in defaults (PipelineConfig)
- a key = value file named by FPBZ_CONFIG or --config
- command-line flags
"""

import logging
import os
from dataclasses import dataclass, asdict, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

logger = logging.getLogger(__name__)

CONFIG_ENV_VAR = "FPBZ_CONFIG"


class ConfigError(ValueError):
    """Invalid configuration key or value."""


@dataclass(frozen=True)
class PipelineConfig:
    """Every tunable of the compress / evaluate pipeline."""
    fft_block: int = 32
    fft_k: float = 0.45
    threshold: Union[int, str] = "auto"
    orientation_block: int = 16
    spur_iters: int = 3
    min_ridge_px: int = 4
    tol: float = 2.0

    # Input ridges are dark on a light background (scanner convention)
    dark_ridges: bool = True
    # Gauss-Newton steps after the chord-length fit, 0 disables
    fit_refine_iters: int = 200

    def __post_init__(self):
        for name in ('fft_block', 'min_ridge_px'):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.orientation_block < 3:
            raise ConfigError(f"orientation_block must be >= 3, got {self.orientation_block}")
        for name in ('spur_iters', 'fit_refine_iters'):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.fft_k < 0:
            raise ConfigError(f"fft_k must be >= 0, got {self.fft_k}")
        if self.tol < 0:
            raise ConfigError(f"tol must be >= 0, got {self.tol}")
        if self.threshold != "auto":
            if isinstance(self.threshold, bool) or not isinstance(self.threshold, int) \
                    or not 0 <= self.threshold <= 255:
                raise ConfigError(f"threshold must be 'auto' or 0..255, got {self.threshold!r}")

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for reports."""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'PipelineConfig':
        """Create from already-typed values; unknown keys are rejected."""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown configuration key(s): {', '.join(unknown)}")
        return cls(**data)

    def with_overrides(self, overrides: Mapping[str, Any]) -> 'PipelineConfig':
        """Copy with the non-None entries of `overrides` applied."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        known = {f.name for f in fields(self)}
        unknown = sorted(set(changes) - known)
        if unknown:
            raise ConfigError(f"Unknown configuration key(s): {', '.join(unknown)}")
        return replace(self, **changes)


def parse_threshold(text: str) -> Union[int, str]:
    """'auto' or an integer 0..255."""
    text = text.strip()
    if text.lower() == "auto":
        return "auto"
    try:
        value = int(text)
    except ValueError:
        raise ConfigError(f"threshold must be 'auto' or an integer, got {text!r}")
    if not 0 <= value <= 255:
        raise ConfigError(f"threshold must lie in 0..255, got {value}")
    return value


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"Expected a boolean, got {text!r}")


_PARSERS = {
    'fft_block': int,
    'fft_k': float,
    'threshold': parse_threshold,
    'orientation_block': int,
    'spur_iters': int,
    'min_ridge_px': int,
    'tol': float,
    'dark_ridges': _parse_bool,
    'fit_refine_iters': int,
}


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, Any]:
    """
    Parse key = value lines.

    Blank lines and '#' comments are ignored; keys are matched after
    replacing '-' with '_'.

    Args:
        text: File contents
        source: Name used in error messages

    Returns:
        Mapping of config field name to typed value

    Raises:
        ConfigError: On malformed lines, unknown keys or bad values
    """
    values: Dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split('=', 1))
        key = key.replace('-', '_')
        parser = _PARSERS.get(key)
        if parser is None:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            values[key] = parser(value)
        except ConfigError as e:
            raise ConfigError(f"{source}:{lineno}: {e}")
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: invalid value {value!r} for {key}")
    return values


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """Read and parse a config file."""
    path = Path(path)
    text = path.read_text(encoding='utf-8')
    values = parse_config_text(text, source=str(path))
    logger.info(f"Loaded {len(values)} setting(s) from {path}")
    return values


def resolve_config(config_path: Optional[Union[str, Path]] = None,
                   overrides: Optional[Mapping[str, Any]] = None,
                   environ: Optional[Mapping[str, str]] = None) -> PipelineConfig:
    """
    Build the effective configuration.

    Args:
        config_path: Explicit config file; falls back to $FPBZ_CONFIG
        overrides: Command-line values, None meaning "not given"
        environ: Environment to consult (defaults to os.environ)

    Returns:
        PipelineConfig with defaults < file < overrides applied
    """
    environ = os.environ if environ is None else environ
    if config_path is None:
        config_path = environ.get(CONFIG_ENV_VAR) or None

    config = PipelineConfig()
    if config_path is not None:
        config = config.with_overrides(load_config_file(config_path))
    if overrides:
        config = config.with_overrides(overrides)
    logger.debug(f"Effective configuration: {config.to_dict()}")
    return config
