"""Synthetic daily-bar panels with optional planted factor structure.

Closes follow a geometric random walk through alternating overnight and
intraday moves. In planted mode the overnight log return of every date with a
full lookback window is generated as ``R = beta @ f + noise``, where ``beta``
is the loadings matrix the pipeline itself computes for that date (all
tickers in the cross-section), and ``f`` and ``noise`` are recorded. The
intraday move partly reverses the planted noise, so a residual mean-reversion
alpha has something to find.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np
import pandas as pd

from .factors import assemble_loadings, parse_factor_spec
from .market_data import PricePanel

DEFAULT_MEAN = {"int": 0.0, "sectors": 0.0, "prc": -3e-4, "rprc": -3e-4, "mom": -0.03,
                "hlv": 5e-4, "hlv1": 5e-4, "hlv2": 5e-4, "vol": 5e-4, "vol1": 5e-4}
DEFAULT_SD = {"int": 5e-3, "sectors": 4e-3, "prc": 1e-3, "rprc": 1e-3, "mom": 0.05,
              "hlv": 1e-3, "hlv1": 1e-3, "hlv2": 1e-3, "vol": 1e-3, "vol1": 1e-3}


@dataclass(frozen=True)
class PlantedSpec:
    """Which factors drive overnight returns, and how.

    ``mean``/``sd`` give the daily factor-return distribution per factor name
    (the ``sectors`` entry applies to every sector column); unspecified names
    fall back to :data:`DEFAULT_MEAN` / :data:`DEFAULT_SD`. ``reversion`` is the
    fraction of the overnight noise undone during the following session.
    """

    factors: tuple = ("int", "prc", "mom", "hlv", "vol")
    mean: Mapping = field(default_factory=dict)
    sd: Mapping = field(default_factory=dict)
    noise: float = 0.01
    window: int = 21
    reversion: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "factors", parse_factor_spec(self.factors))
        if self.noise < 0:
            raise ValueError("noise must be >= 0")
        if self.window < 1:
            raise ValueError("window must be >= 1")

    def column_moments(self, columns) -> tuple:
        means, sds = [], []
        for c in columns:
            key = "sectors" if c.startswith("S") and c[1:].isdigit() else c
            means.append(self.mean.get(key, DEFAULT_MEAN[key]))
            sds.append(self.sd.get(key, DEFAULT_SD[key]))
        return np.array(means, dtype=float), np.array(sds, dtype=float)


@dataclass(frozen=True, eq=False)
class PlantedTruth:
    """What the generator used; ``factor_returns[j]`` belongs to ``dates[j]``."""

    sector_map: dict
    spec: Optional[PlantedSpec] = None
    columns: tuple = ()
    dates: tuple = ()
    s: tuple = ()
    factor_returns: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    loadings: tuple = ()
    noise: tuple = ()

    def factor_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.factor_returns, columns=list(self.columns))
        frame.insert(0, "date", [str(d) for d in self.dates])
        return frame

    def loadings_frame(self) -> pd.DataFrame:
        parts = []
        for lm in self.loadings:
            part = pd.DataFrame(lm.values, columns=list(lm.columns))
            part.insert(0, "ticker", list(lm.tickers))
            part.insert(0, "date", str(lm.date))
            parts.append(part)
        if not parts:
            return pd.DataFrame(columns=["date", "ticker", *self.columns])
        return pd.concat(parts, ignore_index=True)


class _Draft:
    """Writable stand-in for a panel while it is being filled (oldest date first)."""

    def __init__(self, tickers, dates):
        self.tickers = tuple(tickers)
        self.dates = dates
        shape = (len(tickers), len(dates))
        for name in ("open", "high", "low", "close", "adj_close", "volume"):
            setattr(self, name, np.full(shape, np.nan))
        self.valid = np.zeros(shape, dtype=bool)

    @property
    def n_tickers(self):
        return len(self.tickers)

    @property
    def n_dates(self):
        return len(self.dates)


def generate_synthetic_panel(
    n_tickers: int,
    n_dates: int,
    planted: Optional[PlantedSpec] = None,
    seed: int = 0,
    n_sectors: int = 10,
    start_date: str = "2010-01-04",
):
    """Generate a deterministic OHLCV panel and its planted-truth record.

    Returns ``(panel, truth)``. Same arguments give bit-identical output.
    """
    if n_tickers < 2:
        raise ValueError("n_tickers must be >= 2")
    window = planted.window if planted is not None else 21
    if n_dates < max(24, window + 3):
        raise ValueError(f"n_dates must be >= {max(24, window + 3)}")
    if n_sectors < 1:
        raise ValueError("n_sectors must be >= 1")

    rng = np.random.default_rng(seed)
    width = max(4, len(str(n_tickers - 1)))
    tickers = [f"T{i:0{width}d}" for i in range(n_tickers)]
    chrono = pd.bdate_range(start_date, periods=n_dates).to_numpy().astype("datetime64[D]")
    dates = chrono[::-1]

    price0 = np.exp(rng.normal(np.log(40.0), 0.7, n_tickers))
    adj_ratio = rng.uniform(0.6, 1.0, n_tickers)
    range_sd = np.exp(rng.normal(np.log(0.012), 0.35, n_tickers))
    volume_level = np.exp(rng.normal(np.log(5e5), 1.0, n_tickers))
    intraday_sd = 0.012
    sector_ids = rng.integers(1, n_sectors + 1, n_tickers)
    sector_map = {t: int(k) for t, k in zip(tickers, sector_ids)}

    draft = _Draft(tickers, dates)
    rec_dates, rec_s, rec_f, rec_beta, rec_noise = [], [], [], [], []
    columns = ()
    prev_close = price0
    for s in range(n_dates - 1, -1, -1):
        if planted is not None and s + window <= n_dates - 1:
            lm = assemble_loadings(draft, s, planted.factors, sector_map=sector_map, d=window)
            if len(lm.tickers) != n_tickers:
                raise RuntimeError("planted loadings dropped tickers")
            if not columns:
                columns = lm.columns
            elif lm.columns != columns:
                raise RuntimeError("planted loadings changed shape")
            mu, sd = planted.column_moments(lm.columns)
            f = mu + sd * rng.standard_normal(len(mu))
            eps = planted.noise * rng.standard_normal(n_tickers)
            overnight = lm.values @ f + eps
            rec_dates.append(dates[s])
            rec_s.append(s)
            rec_f.append(f)
            rec_beta.append(lm)
            rec_noise.append(eps)
        else:
            eps = 0.01 * rng.standard_normal(n_tickers)
            overnight = 0.004 * rng.standard_normal() + eps
        reversion = planted.reversion if planted is not None else 0.1
        intraday = -reversion * eps + intraday_sd * rng.standard_normal(n_tickers)
        o = prev_close * np.exp(overnight)
        c = o * np.exp(intraday)
        draft.open[:, s] = o
        draft.close[:, s] = c
        draft.high[:, s] = np.maximum(o, c) * np.exp(np.abs(rng.standard_normal(n_tickers)) * range_sd)
        draft.low[:, s] = np.minimum(o, c) * np.exp(-np.abs(rng.standard_normal(n_tickers)) * range_sd)
        draft.adj_close[:, s] = c * adj_ratio
        draft.volume[:, s] = np.round(volume_level * np.exp(0.3 * rng.standard_normal(n_tickers)))
        draft.valid[:, s] = True
        prev_close = c

    panel = PricePanel(tickers=tickers, dates=dates, open=draft.open, high=draft.high, low=draft.low,
                       close=draft.close, adj_close=draft.adj_close, volume=draft.volume)
    if not panel.valid.all():
        raise RuntimeError("generator produced an invalid bar")
    truth = PlantedTruth(
        sector_map=sector_map, spec=planted, columns=tuple(columns),
        dates=tuple(rec_dates), s=tuple(rec_s),
        factor_returns=np.array(rec_f) if rec_f else np.empty((0, len(columns))),
        loadings=tuple(rec_beta), noise=tuple(rec_noise),
    )
    return panel, truth


__all__ = ["PlantedSpec", "PlantedTruth", "generate_synthetic_panel"]
