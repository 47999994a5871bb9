"""Flat ``key = value`` run configuration."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, fields
from typing import Optional

from .factors import DEFAULT_WINDOW, parse_factor_spec


class ConfigError(ValueError):
    pass


def _bool(text) -> bool:
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _optional(text):
    text = str(text).strip()
    return None if text.lower() in ("", "none") else text


def _models(text) -> tuple:
    """``int; int,prc; S,prc,mom`` -> tuple of parsed specs."""
    specs = [part for part in str(text).split(";") if part.strip()]
    if not specs:
        raise ConfigError("no factor spec given")
    try:
        return tuple(parse_factor_spec(part) for part in specs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


@dataclass
class RunConfig:
    data: Optional[str] = None
    sectors: Optional[str] = None
    start: Optional[str] = None
    end: Optional[str] = None
    top_n: int = 2000
    rank_lo: Optional[int] = None
    rank_hi: Optional[int] = None
    d: int = DEFAULT_WINDOW
    rebalance_period: int = 21
    addv_window: int = 21
    models: tuple = (("int", "prc", "mom", "hlv", "vol"),)
    investment: float = 20_000_000.0
    normalize: bool = True
    layout: str = "auto"
    residuals: bool = False
    output: str = "out"
    synthetic: bool = False
    seed: int = 0
    n_tickers: int = 500
    n_dates: int = 300
    n_sectors: int = 10
    planted: Optional[tuple] = ("int", "prc", "mom", "hlv", "vol")
    noise: float = 0.01

    def validate(self) -> "RunConfig":
        if self.d < 1:
            raise ConfigError("d must be >= 1")
        if self.top_n < 1:
            raise ConfigError("top_n must be >= 1")
        if self.rebalance_period < 1 or self.addv_window < 1:
            raise ConfigError("rebalance_period and addv_window must be >= 1")
        if (self.rank_lo is None) != (self.rank_hi is None):
            raise ConfigError("rank_lo and rank_hi must be given together")
        if self.rank_lo is not None and not 1 <= self.rank_lo <= self.rank_hi:
            raise ConfigError("need 1 <= rank_lo <= rank_hi")
        if self.start and self.end and self.start > self.end:
            raise ConfigError("empty date range: start is after end")
        if not self.investment > 0:
            raise ConfigError("investment must be > 0")
        if self.layout not in ("auto", "single-factor", "multi-factor", "sector"):
            raise ConfigError(f"unknown layout {self.layout!r}")
        return self

    @property
    def rank_range(self):
        return None if self.rank_lo is None else (self.rank_lo, self.rank_hi)

    def echo(self) -> list:
        """``key = value`` lines for the run log."""
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "models":
                value = "; ".join(",".join(spec) for spec in value)
            elif f.name == "planted":
                value = "none" if value is None else ",".join(value)
            lines.append(f"{f.name} = {value}")
        return lines


_CONVERTERS = {
    "data": _optional, "sectors": _optional, "start": _optional, "end": _optional,
    "top_n": int, "rank_lo": lambda v: None if _optional(v) is None else int(v),
    "rank_hi": lambda v: None if _optional(v) is None else int(v),
    "d": int, "rebalance_period": int, "addv_window": int,
    "models": _models, "factors": _models, "investment": float, "normalize": _bool,
    "layout": str, "residuals": _bool, "output": str, "synthetic": _bool, "seed": int,
    "n_tickers": int, "n_dates": int, "n_sectors": int,
    "planted": lambda v: None if _optional(v) is None else _models(v)[0],
    "noise": float,
}

CONFIG_KEYS = tuple(_CONVERTERS)


def apply_values(config: RunConfig, values: dict) -> RunConfig:
    for key, raw in values.items():
        key = key.strip().lower().replace("-", "_")
        if key not in _CONVERTERS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            value = _CONVERTERS[key](raw.strip() if isinstance(raw, str) else raw)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from None
        setattr(config, "models" if key == "factors" else key, value)
    return config


def read_config(path) -> dict:
    """Parse a flat config file into raw string values."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        with open(path) as fh:
            parser.read_string("[run]\n" + fh.read(), source=str(path))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path!r}: {exc}") from None
    return dict(parser["run"])


def load_config(path=None, overrides: Optional[dict] = None) -> RunConfig:
    config = RunConfig()
    if path is not None:
        apply_values(config, read_config(path))
    if overrides:
        apply_values(config, overrides)
    return config.validate()
