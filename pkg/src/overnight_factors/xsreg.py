"""Per-date cross-sectional regressions and Fama-MacBeth serial statistics."""

from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import DataError, NumericalError, RankDeficientError
from .factors import DEFAULT_WINDOW, LoadingsMatrix, assemble_loadings, parse_factor_spec
from .market_data import PricePanel, overnight_returns
from .universe import UniverseSchedule

logger = logging.getLogger(__name__)

TRADING_DAYS = 252
# relative residual norm below which a fit is treated as exact (F undefined)
PERFECT_FIT_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class RegressionDay:
    date: np.datetime64
    s: int
    columns: tuple
    factor_returns: dict
    tickers: tuple
    rows: np.ndarray
    residuals: np.ndarray
    f_stat: float
    n: int
    k: int
    loadings: Optional[LoadingsMatrix] = field(default=None, repr=False)

    @property
    def perfect_fit(self) -> bool:
        return math.isinf(self.f_stat)

    def residual_map(self) -> dict:
        return dict(zip(self.tickers, self.residuals.tolist()))


def solve_least_squares(X: np.ndarray, y: np.ndarray):
    """Least squares via column-pivoted QR.

    Returns ``(coef, fitted)``. Raises :class:`RankDeficientError` instead of
    falling back to a pseudo-inverse.
    """
    n, k = X.shape
    q, r, perm = scipy.linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = max(n, k) * np.finfo(float).eps * (diag[0] if k else 0.0)
    if k == 0 or diag[-1] <= tol:
        raise RankDeficientError(f"design matrix is rank deficient (n={n}, k={k})")
    qty = q.T @ y
    coef = np.empty(k)
    coef[perm] = scipy.linalg.solve_triangular(r, qty)
    # projecting through Q keeps X'e at rounding level regardless of conditioning
    fitted = q @ qty
    return coef, fitted


def regress_day(returns, loadings: LoadingsMatrix) -> RegressionDay:
    """Unweighted OLS of one date's returns on its loadings.

    The F-statistic is the uncentered form
    ``(sum(fitted**2) / k) / (sum(resid**2) / (n - k))``, i.e. the test of all
    coefficients being zero, which stays defined for an intercept-only model.
    A perfect fit yields ``f_stat = inf``.
    """
    y = np.asarray(returns, dtype=float)
    X = loadings.values
    n, k = X.shape
    if y.shape != (n,):
        raise ValueError(f"returns have shape {y.shape}, loadings have {n} rows")
    if not np.all(np.isfinite(y)):
        raise ValueError("returns contain non-finite values")
    if n <= k:
        raise NumericalError(f"cross-section too small: n={n} <= k={k}")
    coef, fitted = solve_least_squares(X, y)
    resid = y - fitted
    rss = float(resid @ resid)
    if rss <= (PERFECT_FIT_RTOL * float(np.linalg.norm(y))) ** 2 * n:
        f_stat = math.inf
    else:
        f_stat = (float(fitted @ fitted) / k) / (rss / (n - k))
    resid.flags.writeable = False
    return RegressionDay(
        date=loadings.date, s=loadings.s, columns=loadings.columns,
        factor_returns=dict(zip(loadings.columns, coef.tolist())),
        tickers=loadings.tickers, rows=loadings.rows, residuals=resid,
        f_stat=f_stat, n=n, k=k, loadings=loadings,
    )


def run_backtest_regressions(
    panel: PricePanel,
    schedule: UniverseSchedule,
    spec,
    d: int = DEFAULT_WINDOW,
    sector_map: Optional[Mapping[str, int]] = None,
    skipped: Optional[list] = None,
) -> list:
    """Regress every backtest date of ``schedule``.

    A date's cross-section is its interval universe restricted to tickers with
    a defined overnight return and all loadings computable. Dates that cannot
    be regressed are skipped; ``(date, reason)`` pairs are appended to
    ``skipped`` when a list is passed.

    Raises
    ------
    DataError
        If no date could be regressed.
    """
    names = parse_factor_spec(spec)
    returns = overnight_returns(panel)
    defined = returns.defined
    days = []
    for s in schedule.date_indices():
        members = schedule.universe_at(s)
        universe = [t for t, ok in zip(panel.tickers, defined[:, s]) if ok]
        if members is not None:
            keep = set(members)
            universe = [t for t in universe if t in keep]
        try:
            loadings = assemble_loadings(panel, s, names, sector_map=sector_map, d=d, universe=universe)
            day = regress_day(returns.values[loadings.rows, s], loadings)
        except (DataError, NumericalError, ValueError) as exc:
            reason = str(exc)
            logger.info("skipping %s: %s", panel.dates[s], reason)
            if skipped is not None:
                skipped.append((panel.dates[s], reason))
            continue
        days.append(day)
    if not days:
        raise DataError("no backtest date could be regressed")
    return days


@dataclass(frozen=True)
class SerialStats:
    """Time-series summary of daily factor returns.

    ``t_stat[A] = sqrt(252) * mean(f_A) / sd(f_A)``; NaN for factors listed in
    ``undefined`` (zero sd).
    """

    columns: tuple
    t_stat: dict
    mean: dict
    sd: dict
    median_f_stat: float
    dates_used: int
    undefined: frozenset = frozenset()
    model: str = ""


def _label_from_columns(columns) -> str:
    parts = []
    for c in columns:
        if c.startswith("S") and c[1:].isdigit():
            if "S" not in parts:
                parts.append("S")
        else:
            parts.append(c)
    return parts[0] + " only" if len(parts) == 1 else "+".join(parts)


def fama_macbeth(days: Sequence[RegressionDay], model: Optional[str] = None) -> SerialStats:
    """Annualized serial t-statistics of the factor returns in ``days``.

    Raises
    ------
    ValueError
        If fewer than two days are given or the days disagree on factor names.
    """
    if len(days) < 2:
        raise ValueError("fama_macbeth needs at least 2 regression days")
    columns = days[0].columns
    for day in days:
        if set(day.columns) != set(columns):
            raise ValueError(f"factor set on {day.date} differs: {day.columns} vs {columns}")
    t_stat, means, sds, undefined = {}, {}, {}, set()
    for name in columns:
        series = np.array([day.factor_returns[name] for day in days])
        m = float(series.mean())
        sd = float(series.std(ddof=1))
        means[name], sds[name] = m, sd
        if sd > 0:
            t_stat[name] = math.sqrt(TRADING_DAYS) * m / sd
        else:
            t_stat[name] = math.nan
            undefined.add(name)
            logger.warning("factor %s has zero return dispersion; t-stat undefined", name)
    median_f = float(np.median([day.f_stat for day in days]))
    return SerialStats(columns=tuple(columns), t_stat=t_stat, mean=means, sd=sds,
                       median_f_stat=median_f, dates_used=len(days),
                       undefined=frozenset(undefined), model=model or _label_from_columns(columns))


def factor_return_matrix(days: Sequence[RegressionDay]):
    """``(dates, columns, values)`` with one row per day."""
    columns = days[0].columns
    values = np.array([[day.factor_returns[c] for c in columns] for day in days])
    return [day.date for day in days], columns, values


def _fmt(x) -> str:
    if x is None:
        return "---"
    if isinstance(x, float) and math.isnan(x):
        return "NA"
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return f"{x:.4f}"


def _is_sector(name: str) -> bool:
    return name.startswith("S") and name[1:].isdigit()


def _as_items(stats) -> list:
    if isinstance(stats, SerialStats):
        return [(stats.model, stats)]
    if isinstance(stats, Mapping):
        return list(stats.items())
    return [(s.model, s) if isinstance(s, SerialStats) else tuple(s) for s in stats]


def report_table(stats, layout: str = "auto") -> str:
    """Render serial statistics as CSV text.

    ``stats`` is one :class:`SerialStats`, a mapping label -> stats, or a list
    of stats / ``(label, stats)`` pairs. Layouts:

    ``single-factor``  one row per regression: ``Regression,F-stat,t-stat:int,t-stat:X``
    ``multi-factor``   one row per regression: ``Regression,t-stat:<f>...,F-stat``
    ``sector``         one row per statistic, one column per regression
    ``auto``           sector if any sector column, single-factor if every
                       model is int plus at most one factor, else multi-factor

    Missing entries print as ``---``; undefined t-stats as ``NA``.
    """
    items = _as_items(stats)
    if not items:
        raise ValueError("no statistics to report")
    if layout == "auto":
        if any(_is_sector(c) for _, st in items for c in st.columns):
            layout = "sector"
        elif all(len(st.columns) <= 2 and st.columns[0] == "int" for _, st in items):
            layout = "single-factor"
        else:
            layout = "multi-factor"

    buf = io.StringIO()
    if layout == "single-factor":
        has_x = any(len(st.columns) > 1 for _, st in items)
        first = items[0][1].columns[0]
        header = ["Regression", "F-stat", f"t-stat:{first}"] + (["t-stat:X"] if has_x else [])
        buf.write(",".join(header) + "\n")
        for label, st in items:
            row = [label, _fmt(st.median_f_stat), _fmt(st.t_stat[st.columns[0]])]
            if has_x:
                row.append(_fmt(st.t_stat[st.columns[1]]) if len(st.columns) > 1 else "---")
            buf.write(",".join(row) + "\n")
    elif layout == "multi-factor":
        names = []
        for _, st in items:
            names.extend(c for c in st.columns if c not in names)
        buf.write(",".join(["Regression"] + [f"t-stat:{c}" for c in names] + ["F-stat"]) + "\n")
        for label, st in items:
            row = [label] + [_fmt(st.t_stat.get(c)) for c in names] + [_fmt(st.median_f_stat)]
            buf.write(",".join(row) + "\n")
    elif layout == "sector":
        style, sectors = [], set()
        for _, st in items:
            for c in st.columns:
                if _is_sector(c):
                    sectors.add(c)
                elif c not in style:
                    style.append(c)
        names = style + sorted(sectors, key=lambda c: int(c[1:]))
        buf.write(",".join(["Factor/Regression"] + [label for label, _ in items]) + "\n")
        buf.write(",".join(["F-stat"] + [_fmt(st.median_f_stat) for _, st in items]) + "\n")
        for c in names:
            buf.write(",".join([f"t-stat:{c}"] + [_fmt(st.t_stat.get(c)) for _, st in items]) + "\n")
    else:
        raise ValueError(f"unknown layout {layout!r}")
    return buf.getvalue()
