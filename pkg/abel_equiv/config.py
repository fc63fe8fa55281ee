import logging
import os
from dataclasses import dataclass, fields, replace
from typing import Any, Dict, Optional

import yaml
from appdirs import user_config_dir

from abel_equiv.errors import ConfigError

LOG = logging.getLogger("config")

OUTPUT_FORMATS = ("json", "csv", "text")

# Config file keys by section, mapped to RunConfig fields
_SECTIONS: Dict[str, Dict[str, str]] = {
    "jet": {"order": "order"},
    "tolerances": {
        "zero": "tol_zero",
        "match": "tol_match",
        "min_overlap": "min_overlap",
    },
    "signature": {"window": "window", "samples": "samples"},
    "verify": {"trials": "trials", "seed": "seed"},
    "output": {"format": "output_format"},
}


@dataclass(frozen=True)
class RunConfig:
    order: int = 8
    tol_zero: float = 1e-9
    tol_match: float = 1e-5
    min_overlap: float = 0.5
    window: float = 0.5
    samples: int = 128
    trials: int = 20
    seed: int = 42
    output_format: str = "json"
    threads: int = 1

    def __post_init__(self) -> None:
        for name in ("tol_zero", "tol_match", "window"):
            if getattr(self, name) <= 0:
                _invalid("%s must be positive, got %r", name, getattr(self, name))
        if self.order < 2:
            _invalid("%s must be at least 2, got %r", "order", self.order)
        if self.samples < 8:
            _invalid("%s must be at least 8, got %r", "samples", self.samples)
        if not 0 < self.min_overlap <= 1:
            _invalid("%s must be in (0, 1], got %r", "min_overlap", self.min_overlap)
        if self.trials < 1:
            _invalid("%s must be positive, got %r", "trials", self.trials)
        if self.threads < 1:
            _invalid("%s must be positive, got %r", "threads", self.threads)
        if self.output_format not in OUTPUT_FORMATS:
            _invalid(
                "%s must be one of json, csv, text, got %r",
                "output.format",
                self.output_format,
            )

    @staticmethod
    def create(data: Optional[Dict[str, Any]] = None) -> "RunConfig":
        """
        Build from a decoded config file, then apply environment overrides
        """
        data = data or {}
        if not isinstance(data, dict):
            raise ConfigError("config file must contain a mapping")

        values: Dict[str, Any] = {}
        for section, content in data.items():
            if section == "threads":
                values["threads"] = content
                continue
            if section not in _SECTIONS:
                LOG.error("Unknown config section: %s", section)
                raise ConfigError(f"unknown config section '{section}'")
            if not isinstance(content, dict):
                raise ConfigError(f"config section '{section}' must be a mapping")
            for key, value in content.items():
                if key not in _SECTIONS[section]:
                    LOG.error("Unknown config key: %s.%s", section, key)
                    raise ConfigError(f"unknown config key '{section}.{key}'")
                values[_SECTIONS[section][key]] = value

        values["threads"] = os.environ.get(
            "ABEL_EQUIV_THREADS", values.get("threads", 1)
        )
        return RunConfig(**_coerce(values))

    def override(self, **changes: Any) -> "RunConfig":
        """
        Copy with the given fields replaced; None values are ignored
        """
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **_coerce(changes))


def _invalid(message: str, name: str, value: Any) -> None:
    LOG.error(message, name, value)
    raise ConfigError(message % (name, value))


def _coerce(values: Dict[str, Any]) -> Dict[str, Any]:
    types = {f.name: f.type for f in fields(RunConfig)}
    result = {}
    for name, value in values.items():
        kind = types[name]
        try:
            result[name] = kind(value)
        except (TypeError, ValueError):
            LOG.error(
                "Config value %s=%r is not a valid %s", name, value, kind.__name__
            )
            message = f"{name} must be a {kind.__name__}, got {value!r}"
            raise ConfigError(message) from None
    return result


def default_config_path() -> str:
    return os.environ.get(
        "ABEL_EQUIV_CFG_PATH", os.path.join(user_config_dir("abel-equiv"), "config.yml")
    )


def load_config(path: Optional[str] = None) -> RunConfig:
    """
    Load the run configuration. Without an explicit path the default location
    is used when a file exists there.
    """
    if path is None:
        path = default_config_path()
        if not os.path.exists(path):
            LOG.debug("No config file at %s, using defaults", path)
            return RunConfig.create()

    LOG.info("Loading config %s", path)

    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.load(f.read(), Loader=yaml.FullLoader)
    except (OSError, yaml.YAMLError) as ex:
        LOG.error("Cannot read config %s: %s", path, ex)
        raise ConfigError(f"cannot read config {path}: {ex}") from ex

    return RunConfig.create(data)
