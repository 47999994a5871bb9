"""Daily bar ingestion, adjusted series and overnight returns.

Panels are stored as ``(n_tickers, n_dates)`` arrays. The date axis follows the
convention that column ``s = 0`` is the most recent trading date and ``s + 1``
is the previous trading date. Files on disk are chronological; the loader and
writer do the reversal.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional

import numpy as np
import pandas as pd

from .errors import DataError

logger = logging.getLogger(__name__)

BAR_COLUMNS = ("date", "ticker", "open", "high", "low", "close", "adj_close", "volume")
_PRICE_FIELDS = ("open", "high", "low", "close", "adj_close", "volume")


def bar_is_valid(open_, high, low, close, adj_close, volume) -> np.ndarray:
    """Elementwise check of the OHLCV bar invariants (NaN counts as invalid)."""
    with np.errstate(invalid="ignore"):
        ok = np.isfinite(open_) & np.isfinite(high) & np.isfinite(low)
        ok &= np.isfinite(close) & np.isfinite(adj_close) & np.isfinite(volume)
        ok &= (open_ > 0) & (high > 0) & (low > 0) & (close > 0) & (adj_close > 0)
        ok &= volume >= 0
        ok &= low <= np.minimum(open_, close)
        ok &= high >= np.maximum(open_, close)
    return ok


def _frozen(a) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class PricePanel:
    """Aligned daily bars for a set of tickers.

    All price arrays have shape ``(n_tickers, n_dates)``; missing bars are NaN.
    ``valid[i, s]`` is true where the bar is present and passes
    :func:`bar_is_valid`. ``adj_open`` is ``None`` until
    :func:`derive_adjusted_open` has been applied.
    """

    tickers: tuple
    dates: np.ndarray
    open: np.ndarray
    high: np.ndarray
    low: np.ndarray
    close: np.ndarray
    adj_close: np.ndarray
    volume: np.ndarray
    valid: np.ndarray = field(default=None)
    adj_open: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "tickers", tuple(str(t) for t in self.tickers))
        dates = np.asarray(self.dates, dtype="datetime64[D]")
        if dates.ndim != 1:
            raise DataError("dates must be one-dimensional")
        if len(dates) > 1 and not np.all(dates[:-1] > dates[1:]):
            raise DataError("dates must be strictly decreasing (index 0 = most recent)")
        object.__setattr__(self, "dates", _frozen(dates))
        shape = (len(self.tickers), len(dates))
        for name in _PRICE_FIELDS:
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise DataError(f"{name} has shape {arr.shape}, expected {shape}")
            object.__setattr__(self, name, _frozen(arr))
        computed = bar_is_valid(self.open, self.high, self.low, self.close,
                                self.adj_close, self.volume)
        if self.valid is None:
            valid = computed
        else:
            valid = np.asarray(self.valid, dtype=bool) & computed
        object.__setattr__(self, "valid", _frozen(valid))
        if self.adj_open is not None:
            adj_open = np.asarray(self.adj_open, dtype=float)
            if adj_open.shape != shape:
                raise DataError("adj_open shape mismatch")
            object.__setattr__(self, "adj_open", _frozen(adj_open))

    @property
    def n_tickers(self) -> int:
        return len(self.tickers)

    @property
    def n_dates(self) -> int:
        return len(self.dates)

    def date_index(self, date) -> int:
        """Return ``s`` for a calendar date (exact match required)."""
        d = np.datetime64(date, "D")
        hits = np.flatnonzero(self.dates == d)
        if len(hits) == 0:
            raise KeyError(f"date {d} not in panel")
        return int(hits[0])

    def ticker_index(self) -> dict:
        return {t: i for i, t in enumerate(self.tickers)}

    def select_tickers(self, tickers: Iterable[str]) -> "PricePanel":
        """Restrict the panel to ``tickers`` (kept in panel order)."""
        wanted = set(tickers)
        rows = [i for i, t in enumerate(self.tickers) if t in wanted]
        kwargs = {name: getattr(self, name)[rows] for name in _PRICE_FIELDS}
        adj_open = None if self.adj_open is None else self.adj_open[rows]
        return PricePanel(tickers=[self.tickers[i] for i in rows], dates=self.dates,
                          valid=self.valid[rows], adj_open=adj_open, **kwargs)


@dataclass(frozen=True, eq=False)
class ReturnPanel:
    """Overnight log-returns; ``values[i, s]`` is NaN where undefined."""

    tickers: tuple
    dates: np.ndarray
    values: np.ndarray

    @property
    def defined(self) -> np.ndarray:
        return np.isfinite(self.values)


def load_panel(source, tickers: Optional[Iterable[str]] = None) -> PricePanel:
    """Read a bar CSV (``date,ticker,open,high,low,close,adj_close,volume``).

    Rows failing the bar invariants are kept but marked invalid. Dates are
    aligned on the union of all trading dates in the file; a ticker absent on a
    date gets an invalid (NaN) cell.

    Raises
    ------
    DataError
        If the file cannot be read, the header lacks a required column, a date
        cannot be parsed, or a ``(ticker, date)`` pair appears twice.
    """
    try:
        frame = pd.read_csv(source, dtype={"ticker": str, "date": str},
                            float_precision="round_trip", skipinitialspace=True)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read bar file {source!r}: {exc}") from exc
    frame.columns = [str(c).strip() for c in frame.columns]
    missing = [c for c in BAR_COLUMNS if c not in frame.columns]
    if missing:
        raise DataError(f"bar file header is missing columns: {', '.join(missing)}")
    if len(set(frame.columns)) != len(frame.columns):
        raise DataError("bar file header has duplicate columns")
    if tickers is not None:
        frame = frame[frame["ticker"].isin(set(tickers))]
    if frame.empty:
        raise DataError("bar file has no rows (after ticker filter)")
    if frame["ticker"].isna().any():
        raise DataError("bar file has rows with an empty ticker")

    try:
        frame["date"] = pd.to_datetime(frame["date"], format="%Y-%m-%d")
    except (ValueError, TypeError) as exc:
        raise DataError(f"unparseable date in bar file: {exc}") from exc
    dup = frame.duplicated(["ticker", "date"])
    if dup.any():
        row = frame[dup].iloc[0]
        raise DataError(f"duplicate row for ticker {row['ticker']} on {row['date'].date()}")
    for name in _PRICE_FIELDS:
        frame[name] = pd.to_numeric(frame[name], errors="coerce")

    tick = np.array(sorted(frame["ticker"].unique()))
    day = frame["date"].to_numpy().astype("datetime64[D]")
    dates = np.unique(day)[::-1]
    row_of = pd.Index(tick).get_indexer(frame["ticker"])
    col_of = pd.Index(dates).get_indexer(day)
    shape = (len(tick), len(dates))
    arrays = {}
    for name in _PRICE_FIELDS:
        arr = np.full(shape, np.nan)
        arr[row_of, col_of] = frame[name].to_numpy(dtype=float)
        arrays[name] = arr
    panel = PricePanel(tickers=tick, dates=dates, **arrays)
    n_bad = int(np.isfinite(panel.close).sum() - panel.valid.sum())
    if n_bad:
        logger.info("%d bar(s) failed validation and were masked", n_bad)
    return panel


def write_panel(panel: PricePanel, path) -> None:
    """Write ``panel`` in the chronological CSV schema read by :func:`load_panel`.

    Floats are written with ``repr`` so round-tripping is bit-exact.
    """
    present = np.zeros(panel.valid.shape, dtype=bool)
    for name in _PRICE_FIELDS:
        present |= np.isfinite(getattr(panel, name))

    def fmt(x):
        return "" if not np.isfinite(x) else repr(float(x))

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(BAR_COLUMNS)
        for s in range(panel.n_dates - 1, -1, -1):
            day = str(panel.dates[s])
            for i, ticker in enumerate(panel.tickers):
                if not present[i, s]:
                    continue
                writer.writerow([day, ticker] + [fmt(getattr(panel, n)[i, s]) for n in _PRICE_FIELDS])


def load_sectors(path) -> dict:
    """Read a ``ticker,sector`` file into ``{ticker: sector_id}`` (ids >= 1)."""
    try:
        frame = pd.read_csv(path, dtype={"ticker": str}, skipinitialspace=True)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataError(f"cannot read sector file {path!r}: {exc}") from exc
    frame.columns = [str(c).strip() for c in frame.columns]
    if "ticker" not in frame.columns or "sector" not in frame.columns:
        raise DataError("sector file header must be 'ticker,sector'")
    if frame["ticker"].duplicated().any():
        raise DataError("sector file lists a ticker more than once")
    sectors = pd.to_numeric(frame["sector"], errors="coerce")
    if sectors.isna().any() or (sectors != np.floor(sectors)).any() or (sectors < 1).any():
        raise DataError("sector ids must be integers >= 1")
    return dict(zip(frame["ticker"], sectors.astype(int)))


def write_sectors(sector_map: Mapping[str, int], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["ticker", "sector"])
        for ticker in sorted(sector_map):
            writer.writerow([ticker, int(sector_map[ticker])])


def derive_adjusted_open(panel: PricePanel) -> PricePanel:
    """Attach ``adj_open = open * adj_close / close`` on valid cells.

    The open is scaled by the same split/dividend factor the vendor applied to
    the close of that day. Invalid cells get NaN.
    """
    with np.errstate(invalid="ignore", divide="ignore"):
        adj_open = panel.open * panel.adj_close / panel.close
    adj_open = np.where(panel.valid, adj_open, np.nan)
    return replace(panel, adj_open=adj_open)


def overnight_returns(panel: PricePanel) -> ReturnPanel:
    """Close-to-next-open log returns ``ln(adj_open[s] / adj_close[s+1])``.

    Undefined (NaN) where either bar is invalid, and on the oldest date.
    """
    if panel.adj_open is None:
        panel = derive_adjusted_open(panel)
    values = np.full(panel.valid.shape, np.nan)
    ok = panel.valid[:, :-1] & panel.valid[:, 1:]
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.log(panel.adj_open[:, :-1] / panel.adj_close[:, 1:])
    values[:, :-1] = np.where(ok, r, np.nan)
    values.flags.writeable = False
    return ReturnPanel(tickers=panel.tickers, dates=panel.dates, values=values)
