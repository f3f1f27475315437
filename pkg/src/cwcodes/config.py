"""
Workbench Configuration
=======================
Defaults for searches, verification and table ranges.

Values come from ``config/workbench.json`` and can be overridden through
``CWCODES_*`` environment variables.
"""

import os
import json
import logging
from pathlib import Path
from dataclasses import dataclass, field, asdict
from typing import Any, Dict, List, Optional

from .errors import ConfigurationError

logger = logging.getLogger(__name__)

CONFIG_DIR = Path(__file__).resolve().parent.parent.parent / 'config'
DEFAULT_CONFIG_PATH = CONFIG_DIR / 'workbench.json'

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# json section -> key -> dataclass field
_JSON_FIELDS = {
    "search": {
        "seed": "DEFAULT_SEED",
        "budget": "DEFAULT_BUDGET",
        "stall_limit": "STALL_LIMIT",
        "workers": "WORKERS",
    },
    "verification": {
        "brute_force_vertex_limit": "BRUTE_FORCE_VERTEX_LIMIT",
        "dense_verify_limit": "DENSE_VERIFY_LIMIT",
        "max_reported_violations": "MAX_REPORTED_VIOLATIONS",
    },
    "table": {
        "n_range": "TABLE_N_RANGE",
        "q_range": "TABLE_Q_RANGE",
    },
    "logging": {
        "level": "LOG_LEVEL",
    },
}

_ENV_FIELDS = {
    "CWCODES_SEED": ("DEFAULT_SEED", int),
    "CWCODES_BUDGET": ("DEFAULT_BUDGET", int),
    "CWCODES_STALL_LIMIT": ("STALL_LIMIT", int),
    "CWCODES_WORKERS": ("WORKERS", int),
    "CWCODES_LOG_LEVEL": ("LOG_LEVEL", str),
}


@dataclass
class WorkbenchConfig:
    """Configuration class for the code workbench"""
    DEFAULT_SEED: int = 0
    DEFAULT_BUDGET: int = 1_000_000
    STALL_LIMIT: int = 1000
    WORKERS: int = 1
    BRUTE_FORCE_VERTEX_LIMIT: int = 100_000
    DENSE_VERIFY_LIMIT: int = 1500
    MAX_REPORTED_VIOLATIONS: int = 50
    TABLE_N_RANGE: List[int] = field(default_factory=lambda: [3, 25])
    TABLE_Q_RANGE: List[int] = field(default_factory=lambda: [2, 10])
    LOG_LEVEL: str = "INFO"
    CONFIG_PATH: Optional[str] = None

    def __post_init__(self):
        path = Path(os.getenv("CWCODES_CONFIG", self.CONFIG_PATH or DEFAULT_CONFIG_PATH))
        if path.exists():
            self._apply_json(path)
        elif self.CONFIG_PATH or os.getenv("CWCODES_CONFIG"):
            raise ConfigurationError(f"config file not found: {path}")

        # Environment variable overrides
        for env_name, (attr, cast) in _ENV_FIELDS.items():
            raw = os.getenv(env_name)
            if raw is None:
                continue
            try:
                setattr(self, attr, cast(raw))
            except ValueError as e:
                raise ConfigurationError(f"{env_name}={raw!r}: {e}") from e

        self._validate()

    def _apply_json(self, path: Path) -> None:
        try:
            with open(path, 'r') as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"cannot read {path}: {e}") from e

        for section, values in data.items():
            if section == "version":
                continue
            mapping = _JSON_FIELDS.get(section)
            if mapping is None or not isinstance(values, dict):
                logger.warning(f"Ignoring unknown config section '{section}' in {path}")
                continue
            for key, value in values.items():
                attr = mapping.get(key)
                if attr is None:
                    logger.warning(f"Ignoring unknown config key '{section}.{key}'")
                    continue
                setattr(self, attr, value)

    def _validate(self) -> None:
        for attr in ("DEFAULT_BUDGET", "STALL_LIMIT", "WORKERS",
                     "BRUTE_FORCE_VERTEX_LIMIT", "DENSE_VERIFY_LIMIT"):
            value = getattr(self, attr)
            if not isinstance(value, int) or value < 1:
                raise ConfigurationError(f"{attr} must be a positive integer, got {value!r}")
        if not isinstance(self.DEFAULT_SEED, int) or self.DEFAULT_SEED < 0:
            raise ConfigurationError(f"DEFAULT_SEED must be a nonnegative integer, got {self.DEFAULT_SEED!r}")
        for attr in ("TABLE_N_RANGE", "TABLE_Q_RANGE"):
            rng = getattr(self, attr)
            if len(rng) != 2 or rng[0] > rng[1]:
                raise ConfigurationError(f"{attr} must be [low, high], got {rng!r}")
        if logging.getLevelName(self.LOG_LEVEL.upper()) == f"Level {self.LOG_LEVEL.upper()}":
            raise ConfigurationError(f"unknown log level {self.LOG_LEVEL!r}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


_cached: Optional[WorkbenchConfig] = None


def load_config() -> WorkbenchConfig:
    """Return the process-wide configuration, reading it on first use"""
    global _cached
    if _cached is None:
        _cached = WorkbenchConfig()
    return _cached


def configure_logging(level: Optional[str] = None) -> None:
    name = (level or load_config().LOG_LEVEL).upper()
    numeric = logging.getLevelName(name)
    if not isinstance(numeric, int):
        raise ConfigurationError(f"unknown log level {level!r}")
    logging.basicConfig(level=numeric, format=LOG_FORMAT)
