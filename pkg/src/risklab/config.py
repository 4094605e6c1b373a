"""Run configuration: a flat ``key = value`` file with ``[section]`` headers."""

from __future__ import annotations

import configparser
import datetime as dt
from dataclasses import dataclass, field
from pathlib import Path

from .exceptions import ConfigError

_SCHEMA = {
    "run": {"data_dir", "out_dir", "seed", "annual_rf"},
    "bootstrap": {"resamples", "confidence"},
    "sweep": {"grid_step", "kappa", "l_values"},
    "data": {"date_min", "date_max"},
    "performance": {"day_count", "sortino_target"},
}


@dataclass(frozen=True)
class RunConfig:
    """Everything a study run depends on besides the data bytes."""

    data_dir: str
    out_dir: str
    annual_rf: float = 0.06
    bootstrap_b: int = 1000
    bootstrap_confidence: float = 0.95
    seed: int = 0
    kappa_kind: str = "chebyshev"
    l_values: tuple[int, ...] = (2, 3, 4, 5)
    grid_step: float = 0.002
    date_min: dt.date | None = None
    date_max: dt.date | None = None
    day_count: float = 365.0
    sortino_target: str = "risk_free"

    def __post_init__(self):
        if self.annual_rf < 0.0:
            raise ConfigError(f"annual_rf must be >= 0, got {self.annual_rf}")
        if not 0.5 < self.bootstrap_confidence < 1.0:
            raise ConfigError(
                f"bootstrap confidence must be in (0.5, 1), got {self.bootstrap_confidence}"
            )
        if self.bootstrap_b < 100:
            raise ConfigError(f"bootstrap resamples must be >= 100, got {self.bootstrap_b}")
        if self.kappa_kind not in ("chebyshev", "gaussian"):
            raise ConfigError(f"unknown kappa kind {self.kappa_kind!r}")
        if not self.l_values or any(l not in (1, 2, 3, 4, 5) for l in self.l_values):
            raise ConfigError(f"l_values must be a non-empty subset of 1..5, got {self.l_values}")
        if not 0.0 < self.grid_step < 0.1:
            raise ConfigError(f"grid_step must be in (0, 0.1), got {self.grid_step}")
        if self.day_count <= 0.0:
            raise ConfigError(f"day_count must be > 0, got {self.day_count}")
        if self.sortino_target not in ("risk_free", "zero", "mean"):
            raise ConfigError(f"unknown sortino_target {self.sortino_target!r}")

    def as_dict(self) -> dict:
        """JSON-friendly echo of the configuration (for the run manifest)."""
        return {
            "data_dir": str(self.data_dir),
            "out_dir": str(self.out_dir),
            "annual_rf": self.annual_rf,
            "bootstrap_b": self.bootstrap_b,
            "bootstrap_confidence": self.bootstrap_confidence,
            "seed": self.seed,
            "kappa_kind": self.kappa_kind,
            "l_values": list(self.l_values),
            "grid_step": self.grid_step,
            "date_min": None if self.date_min is None else self.date_min.isoformat(),
            "date_max": None if self.date_max is None else self.date_max.isoformat(),
            "day_count": self.day_count,
            "sortino_target": self.sortino_target,
        }


def _parse_date(raw: str, key: str) -> dt.date:
    try:
        return dt.date.fromisoformat(raw)
    except ValueError:
        raise ConfigError(f"{key} must be an ISO date (YYYY-MM-DD), got {raw!r}") from None


def parse_config(path) -> RunConfig:
    """Load and validate a run configuration file.

    Relative ``data_dir`` / ``out_dir`` paths are resolved against the config
    file's own directory. Unknown sections or keys are rejected so typos
    cannot silently fall back to defaults.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key in parser.options(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")

    def get(section, key, fallback=None):
        return parser.get(section, key, fallback=fallback)

    data_dir = get("run", "data_dir")
    out_dir = get("run", "out_dir")
    if not data_dir or not out_dir:
        raise ConfigError(f"{path}: [run] must set data_dir and out_dir")
    base = path.parent

    def number(section, key, cast, default):
        raw = get(section, key)
        if raw is None:
            return default
        try:
            return cast(raw)
        except ValueError:
            raise ConfigError(f"{path}: {key} = {raw!r} is not a valid {cast.__name__}") from None

    l_raw = get("sweep", "l_values")
    if l_raw is None:
        l_values = (2, 3, 4, 5)
    else:
        try:
            l_values = tuple(int(part) for part in l_raw.split(",") if part.strip())
        except ValueError:
            raise ConfigError(f"{path}: l_values = {l_raw!r} must be comma-separated integers") from None

    date_min = get("data", "date_min")
    date_max = get("data", "date_max")
    return RunConfig(
        data_dir=str((base / data_dir).resolve()),
        out_dir=str((base / out_dir).resolve()),
        annual_rf=number("run", "annual_rf", float, 0.06),
        bootstrap_b=number("bootstrap", "resamples", int, 1000),
        bootstrap_confidence=number("bootstrap", "confidence", float, 0.95),
        seed=number("run", "seed", int, 0),
        kappa_kind=get("sweep", "kappa", "chebyshev"),
        l_values=l_values,
        grid_step=number("sweep", "grid_step", float, 0.002),
        date_min=None if date_min is None else _parse_date(date_min, "date_min"),
        date_max=None if date_max is None else _parse_date(date_max, "date_max"),
        day_count=number("performance", "day_count", float, 365.0),
        sortino_target=get("performance", "sortino_target", "risk_free"),
    )
