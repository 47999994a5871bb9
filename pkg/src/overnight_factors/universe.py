"""ADDV ranking and the fixed-interval universe schedule."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from .errors import DataError
from .market_data import PricePanel

logger = logging.getLogger(__name__)


def addv(panel: PricePanel, s: int, d: int = 21) -> np.ndarray:
    """Average daily dollar volume over the ``d`` days before ``s``.

    ``D[i] = mean(V[i, s+r] * close[i, s+r] for r in 1..d)``; NaN for tickers
    without a complete window.
    """
    if d < 1:
        raise ValueError("addv window must be >= 1")
    out = np.full(panel.n_tickers, np.nan)
    if s < 0 or s + d >= panel.n_dates:
        return out
    cols = slice(s + 1, s + d + 1)
    ok = panel.valid[:, cols].all(axis=1)
    out[ok] = np.mean(panel.volume[ok, cols] * panel.close[ok, cols], axis=1)
    return out


@dataclass(frozen=True)
class Interval:
    """Dates ``first .. last`` (as date indices, ``first >= last``) and their universe.

    ``tickers`` is in ADDV rank order.
    """

    first: int
    last: int
    tickers: tuple

    def date_indices(self) -> range:
        """Chronological date indices of the interval."""
        return range(self.first, self.last - 1, -1)

    def __contains__(self, s) -> bool:
        return self.last <= s <= self.first

    def __len__(self) -> int:
        return self.first - self.last + 1


@dataclass(frozen=True)
class UniverseSchedule:
    intervals: tuple
    top_n: int
    rebalance_period: int = 21
    addv_window: int = 21
    rank_range: Optional[Tuple[int, int]] = None

    def universe_at(self, s: int) -> Optional[tuple]:
        for interval in self.intervals:
            if s in interval:
                return interval.tickers
        return None

    def date_indices(self) -> list:
        """All backtest date indices, chronological."""
        return [s for interval in self.intervals for s in interval.date_indices()]

    def to_frame(self, panel: PricePanel) -> pd.DataFrame:
        rows = []
        for k, interval in enumerate(self.intervals):
            for rank, ticker in enumerate(interval.tickers, start=1):
                rows.append((k, str(panel.dates[interval.first]), str(panel.dates[interval.last]),
                             rank, ticker))
        return pd.DataFrame(rows, columns=["interval", "start", "end", "rank", "ticker"])


def rank_by_addv(dollar_volume: np.ndarray, tickers) -> list:
    """Tickers with a defined ADDV, by descending ADDV then ascending symbol."""
    keyed = [(-float(v), t) for v, t in zip(dollar_volume, tickers) if np.isfinite(v)]
    keyed.sort()
    return [t for _, t in keyed]


def select_ranked(ranked: list, top_n: int, rank_range: Optional[Tuple[int, int]] = None,
                  warn: bool = True) -> tuple:
    """Take the top ``top_n`` names, or ranks ``lo..hi`` (1-based, inclusive)."""
    if rank_range is not None:
        lo, hi = rank_range
        if not 1 <= lo <= hi:
            raise ValueError(f"invalid rank range {rank_range}")
        if hi > len(ranked) and warn:
            logger.warning("rank range %s exceeds the %d ranked tickers; clipped", rank_range, len(ranked))
        return tuple(ranked[lo - 1:hi])
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    if top_n > len(ranked) and warn:
        logger.warning("top_n=%d exceeds the %d ranked tickers; clipped", top_n, len(ranked))
    return tuple(ranked[:top_n])


def build_schedule(
    panel: PricePanel,
    top_n: int = 2000,
    rebalance_period: int = 21,
    addv_window: int = 21,
    rank_range: Optional[Tuple[int, int]] = None,
    start=None,
    end=None,
    lookback: Optional[int] = None,
) -> UniverseSchedule:
    """Split the backtest range into ``rebalance_period``-day intervals and
    pick each interval's universe by ADDV.

    Each interval's ADDV is taken over the ``addv_window`` trading days
    immediately before its first date, so no interval sees its own data.
    Intervals are anchored at the backtest start; the last one may be short.

    ``start``/``end`` are optional calendar dates bounding the backtest.
    ``lookback`` is the number of earlier dates every backtest date needs
    (defaults to ``addv_window``; pass ``max(d, addv_window)`` when factor
    windows are longer). The default start is the earliest date with enough
    history.

    Raises
    ------
    DataError
        If there is not enough history before the requested start, or the
        date range is empty.
    """
    if rebalance_period < 1:
        raise ValueError("rebalance_period must be >= 1")
    lookback = max(addv_window, lookback or 0, 1)
    earliest = panel.n_dates - 1 - lookback
    if earliest < 0:
        raise DataError(f"panel has {panel.n_dates} dates; need more than {lookback} for the ADDV window")

    first = earliest
    if start is not None:
        start_d = np.datetime64(start, "D")
        eligible = np.flatnonzero(panel.dates >= start_d)
        if len(eligible) == 0:
            raise DataError(f"backtest start {start_d} is after the last panel date")
        first = int(eligible[-1])
        if first > earliest:
            raise DataError(f"insufficient history before backtest start {start_d}: "
                            f"need {lookback} prior trading dates")
    last = 0
    if end is not None:
        end_d = np.datetime64(end, "D")
        eligible = np.flatnonzero(panel.dates <= end_d)
        if len(eligible) == 0:
            raise DataError(f"backtest end {end_d} is before the first panel date")
        last = int(eligible[0])
    if last > first:
        raise DataError("empty backtest date range")

    if rank_range is not None:
        top_n = rank_range[1] - rank_range[0] + 1

    intervals, short = [], 0
    s = first
    while s >= last:
        s_end = max(s - rebalance_period + 1, last)
        ranked = rank_by_addv(addv(panel, s, addv_window), panel.tickers)
        tickers = select_ranked(ranked, top_n, rank_range, warn=False)
        short += len(tickers) < top_n
        intervals.append(Interval(first=s, last=s_end, tickers=tickers))
        s = s_end - 1
    if short:
        logger.warning("%d of %d intervals have fewer than %d rankable tickers; universe clipped",
                       short, len(intervals), top_n)
    return UniverseSchedule(intervals=tuple(intervals), top_n=top_n, rebalance_period=rebalance_period,
                            addv_window=addv_window, rank_range=rank_range)
