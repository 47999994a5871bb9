"""Intraday mean-reversion alpha on overnight residuals.

Each day the book is opened at the open against the overnight residuals of
the chosen factor model and closed at the same day's close. No costs, no
financing, no position limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from .errors import DataError, NumericalError
from .factors import DEFAULT_WINDOW, model_label, normalize_gaussian
from .market_data import PricePanel
from .universe import UniverseSchedule
from .xsreg import TRADING_DAYS, run_backtest_regressions

DEFAULT_INVESTMENT = 20_000_000.0  # gross: $10M long + $10M short


@dataclass(frozen=True, eq=False)
class HoldingsDay:
    date: np.datetime64
    tickers: tuple
    holdings: np.ndarray
    investment_level: float

    def as_series(self) -> pd.Series:
        return pd.Series(self.holdings, index=list(self.tickers), name=str(self.date))


def compute_holdings(residuals, investment_level: float, normalize: bool = True,
                     date=None, tickers: Sequence[str] = ()) -> HoldingsDay:
    """Dollar holdings ``H = -e * I / sum(|e|)`` against the residuals ``e``.

    With ``normalize`` the residuals are first rank-mapped to a normal shape
    with their own mean and standard deviation. ``investment_level`` is the
    gross book ``sum(|H|)``.
    """
    e = np.asarray(residuals, dtype=float)
    if normalize:
        e = normalize_gaussian(e, target_mean=float(e.mean()))
    gross = float(np.abs(e).sum())
    if not gross > 0:
        raise NumericalError("all residuals are zero; holdings undefined")
    h = -e * (investment_level / gross)
    return HoldingsDay(date=date, tickers=tuple(tickers) or tuple(range(len(e))),
                       holdings=h, investment_level=float(investment_level))


@dataclass(frozen=True, eq=False)
class SimReport:
    """Daily P&L and summary metrics of one simulated model.

    ``roc`` is a fraction per year (``252 * mean(pnl) / I``); ``sharpe`` is
    annualized and NaN when the P&L has zero dispersion (see
    ``sharpe_defined``); ``cps`` is cents of P&L per share traded.
    """

    model: str
    dates: tuple
    daily_pnl: np.ndarray
    daily_shares: np.ndarray
    holdings: tuple
    investment_level: float
    roc: float
    sharpe: float
    cps: float
    shares_traded: float

    @property
    def sharpe_defined(self) -> bool:
        return not math.isnan(self.sharpe)

    @property
    def cumulative_pnl(self) -> np.ndarray:
        return np.cumsum(self.daily_pnl)


def summarize(model: str, dates, daily_pnl, daily_shares, holdings, investment_level: float) -> SimReport:
    pnl = np.asarray(daily_pnl, dtype=float)
    shares = np.asarray(daily_shares, dtype=float)
    if len(pnl) == 0:
        raise DataError("no simulated days")
    mean = float(pnl.mean())
    sd = float(pnl.std(ddof=1)) if len(pnl) > 1 else 0.0
    sharpe = math.sqrt(TRADING_DAYS) * mean / sd if sd > 0 else math.nan
    total_shares = float(shares.sum())
    cps = 100.0 * float(pnl.sum()) / total_shares if total_shares > 0 else math.nan
    return SimReport(model=model, dates=tuple(dates), daily_pnl=pnl, daily_shares=shares,
                     holdings=tuple(holdings), investment_level=float(investment_level),
                     roc=TRADING_DAYS * mean / investment_level, sharpe=sharpe, cps=cps,
                     shares_traded=total_shares)


def simulate(
    panel: PricePanel,
    schedule: UniverseSchedule,
    spec,
    investment_level: float = DEFAULT_INVESTMENT,
    normalize: bool = True,
    d: int = DEFAULT_WINDOW,
    sector_map: Optional[Mapping[str, int]] = None,
    skipped: Optional[list] = None,
) -> SimReport:
    """Run the delay-0 intraday alpha for one factor model.

    P&L per stock is ``H * (close / open - 1)`` and shares traded are
    ``2 * |H| / open``, on the unadjusted prices of the trade date.
    """
    days = run_backtest_regressions(panel, schedule, spec, d=d, sector_map=sector_map, skipped=skipped)
    dates, pnl, shares, books = [], [], [], []
    for day in days:
        book = compute_holdings(day.residuals, investment_level, normalize=normalize,
                                date=day.date, tickers=day.tickers)
        o = panel.open[day.rows, day.s]
        c = panel.close[day.rows, day.s]
        dates.append(day.date)
        pnl.append(float(np.sum(book.holdings * (c / o - 1.0))))
        shares.append(float(np.sum(2.0 * np.abs(book.holdings) / o)))
        books.append(book)
    return summarize(model_label(spec), dates, pnl, shares, books, investment_level)


@dataclass(frozen=True, eq=False)
class ModelComparison:
    reports: tuple

    def table(self) -> pd.DataFrame:
        """``Model, ROC, SR, CPS`` with ROC in percent."""
        return pd.DataFrame({
            "Model": [r.model for r in self.reports],
            "ROC": [100.0 * r.roc for r in self.reports],
            "SR": [r.sharpe for r in self.reports],
            "CPS": [r.cps for r in self.reports],
        })

    def cumulative(self) -> list:
        """One cumulative P&L series per model, indexed by date."""
        return [pd.Series(r.cumulative_pnl, index=pd.to_datetime(list(r.dates)), name=r.model)
                for r in self.reports]


def compare_models(panel, schedule, specs, investment_level: float = DEFAULT_INVESTMENT,
                   normalize: bool = True, d: int = DEFAULT_WINDOW, sector_map=None) -> ModelComparison:
    if len(specs) == 0:
        raise ValueError("compare_models needs at least one spec")
    return ModelComparison(reports=tuple(
        simulate(panel, schedule, spec, investment_level, normalize, d=d, sector_map=sector_map)
        for spec in specs))


def plot_cumulative_pnl(comparison: ModelComparison, path, title: str = "Intraday mean-reversion alpha"):
    """Write the cumulative P&L curves to an SVG file.

    Output is byte-stable for identical input (fixed SVG id salt, no date stamp).
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "overnight-factors", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(8, 6))
        level = comparison.reports[0].investment_level
        for series in comparison.cumulative():
            ax.plot(series.index, series.to_numpy() / 1e6, label=series.name, linewidth=1.2)
        ax.set_xlabel("date")
        ax.set_ylabel("cumulative P&L ($M)")
        ax.set_title(f"{title}\nI = ${level / 1e6:g}M gross (${level / 2e6:g}M long + ${level / 2e6:g}M short)")
        ax.legend(loc="upper left", fontsize="small")
        ax.grid(True, alpha=0.3)
        fig.autofmt_xdate()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
