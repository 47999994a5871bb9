"""Factor loadings for overnight returns.

Style factors are built only from daily bars of the days *before* the
regression date ``s`` (columns ``s+1 ... s+d``). Raw per-ticker columns are
returned as full-length arrays aligned with ``panel.tickers``; NaN marks a
ticker whose inputs are missing, which drops it from the cross-section.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy.stats import norm, rankdata

from .errors import DataError, NumericalError, RankDeficientError
from .market_data import PricePanel

STYLE_FACTORS = ("prc", "rprc", "mom", "hlv", "hlv1", "hlv2", "vol", "vol1")
FACTOR_NAMES = ("int", "sectors") + STYLE_FACTORS
NORMALIZED_FACTORS = frozenset({"hlv", "hlv1", "hlv2", "vol", "vol1"})
HLV_VARIANTS = ("hlv", "hlv1", "hlv2")
VOL_VARIANTS = ("vol", "vol1")
DEFAULT_WINDOW = 21
# floor on the argument of the outer log in hlv*; keeps flat-price tickers finite
LOG_FLOOR = 1e-20

_ALIASES = {"s": "sectors", "sector": "sectors", "sectors": "sectors", "bics": "sectors"}


def parse_factor_spec(spec) -> tuple:
    """Normalise a factor-set spec to a tuple of canonical names.

    Accepts ``"int,prc,mom"``, ``"int+prc+mom"`` or any sequence of names.
    ``S`` is an alias for the sector block.

    >>> parse_factor_spec("S+prc+mom+hlv+vol")
    ('sectors', 'prc', 'mom', 'hlv', 'vol')
    """
    if isinstance(spec, str):
        spec = spec.strip()
        if spec.endswith(" only"):
            spec = spec[: -len(" only")]
        parts = spec.replace("+", ",").split(",")
    else:
        parts = list(spec)
    names = []
    for part in parts:
        name = str(part).strip()
        if not name:
            continue
        name = _ALIASES.get(name.lower(), name)
        if name not in FACTOR_NAMES:
            raise ValueError(f"unknown factor {part!r}; expected one of {', '.join(FACTOR_NAMES)}")
        if name in names:
            raise ValueError(f"factor {name!r} listed twice")
        names.append(name)
    if not names:
        raise ValueError("empty factor spec")
    if "int" in names and "sectors" in names:
        raise ValueError("int and sectors are mutually exclusive: sectors already span the intercept")
    return tuple(names)


def model_label(spec) -> str:
    """Report label, e.g. ``int only`` or ``S+prc+mom+hlv+vol``."""
    names = ["S" if n == "sectors" else n for n in parse_factor_spec(spec)]
    if len(names) == 1:
        return f"{names[0]} only"
    return "+".join(names)


@dataclass(frozen=True, eq=False)
class LoadingsMatrix:
    """One date's ``N x K`` loadings.

    ``rows`` are the panel row indices of ``tickers``.
    """

    date: np.datetime64
    s: int
    tickers: tuple
    rows: np.ndarray
    columns: tuple
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (len(self.tickers), len(self.columns)):
            raise ValueError("loadings shape does not match tickers x columns")

    @property
    def n(self) -> int:
        return len(self.tickers)

    @property
    def k(self) -> int:
        return len(self.columns)

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.columns.index(name)]


def _window(panel: PricePanel, s: int, d: int):
    """Column slice for dates ``s+1 .. s+d`` and the per-ticker completeness mask."""
    if d < 1:
        raise ValueError("window d must be >= 1")
    if s < 0 or s + d >= panel.n_dates:
        return None, np.zeros(panel.n_tickers, dtype=bool)
    cols = slice(s + 1, s + d + 1)
    return cols, panel.valid[:, cols].all(axis=1)


def beta_int(cross_section: Sequence) -> np.ndarray:
    """Unit column (the ``market beta'' stand-in)."""
    if len(cross_section) == 0:
        raise ValueError("empty cross-section")
    return np.ones(len(cross_section))


def beta_prc(panel: PricePanel, s: int, adjusted: bool = True) -> np.ndarray:
    """Log of the previous day's close (adjusted for ``prc``, unadjusted for ``rprc``)."""
    out = np.full(panel.n_tickers, np.nan)
    if s + 1 >= panel.n_dates:
        return out
    ok = panel.valid[:, s + 1]
    price = panel.adj_close[:, s + 1] if adjusted else panel.close[:, s + 1]
    out[ok] = np.log(price[ok])
    return out


def beta_mom(panel: PricePanel, s: int) -> np.ndarray:
    """Previous day's open-to-close log return."""
    out = np.full(panel.n_tickers, np.nan)
    if s + 1 >= panel.n_dates:
        return out
    ok = panel.valid[:, s + 1]
    out[ok] = np.log(panel.close[ok, s + 1] / panel.open[ok, s + 1])
    return out


def beta_hlv(panel: PricePanel, s: int, d: int = DEFAULT_WINDOW, variant: str = "hlv") -> np.ndarray:
    """Intraday volatility loading over the ``d`` days before ``s`` (unnormalized).

    ``hlv``  : ``0.5 * ln(mean(((H - L) / C)**2))``
    ``hlv1`` : ``ln(mean(|H - L| / C))``
    ``hlv2`` : ``ln(mean(|ln(C / O)|))``
    """
    out = np.full(panel.n_tickers, np.nan)
    cols, ok = _window(panel, s, d)
    if cols is None or not ok.any():
        return out
    h, l = panel.high[ok, cols], panel.low[ok, cols]
    c, o = panel.close[ok, cols], panel.open[ok, cols]
    if variant == "hlv":
        u = np.mean(((h - l) / c) ** 2, axis=1)
        out[ok] = 0.5 * np.log(np.maximum(u, LOG_FLOOR))
    elif variant == "hlv1":
        u = np.mean(np.abs(h - l) / c, axis=1)
        out[ok] = np.log(np.maximum(u, LOG_FLOOR))
    elif variant == "hlv2":
        u = np.mean(np.abs(np.log(c / o)), axis=1)
        out[ok] = np.log(np.maximum(u, LOG_FLOOR))
    else:
        raise ValueError(f"unknown hlv variant {variant!r}")
    return out


def beta_vol(panel: PricePanel, s: int, d: int = DEFAULT_WINDOW, variant: str = "vol") -> np.ndarray:
    """Log of the ``d``-day average volume (``vol1``: split-adjusted volume).

    Tickers with zero average volume are excluded (NaN).
    """
    out = np.full(panel.n_tickers, np.nan)
    cols, ok = _window(panel, s, d)
    if cols is None or not ok.any():
        return out
    v = panel.volume[ok, cols]
    if variant == "vol":
        avg = v.mean(axis=1)
    elif variant == "vol1":
        avg = np.mean(v * panel.close[ok, cols] / panel.adj_close[ok, cols], axis=1)
    else:
        raise ValueError(f"unknown vol variant {variant!r}")
    vals = np.full(avg.shape, np.nan)
    pos = avg > 0
    vals[pos] = np.log(avg[pos])
    out[ok] = vals
    return out


def normalize_gaussian(raw, target_mean: float = 0.0) -> np.ndarray:
    """Map values onto a normal shape by rank, keeping their dispersion.

    Each value's average rank ``r`` goes to ``Phi^-1((r - 0.5) / N)``; the
    scores are then centred and scaled so the output has sample mean
    ``target_mean`` and the same sample standard deviation as ``raw``.
    Ties map to identical outputs and order is preserved. The shift costs
    about ``ulp(target_mean) / sd`` of relative precision in the output sd.

    Raises
    ------
    ValueError
        If fewer than two values are given.
    NumericalError
        If ``raw`` has zero standard deviation.
    """
    x = np.asarray(raw, dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise ValueError("normalize_gaussian needs a 1-d column with at least 2 values")
    if not np.all(np.isfinite(x)):
        raise ValueError("normalize_gaussian input contains non-finite values")
    sd = x.std(ddof=1)
    if not sd > 0:
        raise NumericalError("cannot normalize a column with zero standard deviation")
    n = len(x)
    z = norm.ppf((rankdata(x, method="average") - 0.5) / n)
    z = z - z.mean()
    return z * (sd / z.std(ddof=1)) + target_mean


def sector_loadings(sector_map: Mapping[str, int], cross_section: Sequence[str]):
    """Binary sector columns for ``cross_section``.

    Returns ``(matrix, names)``; names are ``S<id>`` in ascending id order and
    sectors with no member in the cross-section are dropped.
    """
    try:
        ids = np.array([int(sector_map[t]) for t in cross_section], dtype=int)
    except KeyError as exc:
        raise DataError(f"ticker {exc.args[0]!r} has no sector assignment") from None
    used = np.unique(ids)
    matrix = (ids[:, None] == used[None, :]).astype(float)
    return matrix, tuple(f"S{k}" for k in used)


def raw_factor(panel: PricePanel, s: int, name: str, d: int = DEFAULT_WINDOW) -> np.ndarray:
    """Full-length unnormalized column for one style factor."""
    if name == "prc":
        return beta_prc(panel, s, adjusted=True)
    if name == "rprc":
        return beta_prc(panel, s, adjusted=False)
    if name == "mom":
        return beta_mom(panel, s)
    if name in HLV_VARIANTS:
        return beta_hlv(panel, s, d, variant=name)
    if name in VOL_VARIANTS:
        return beta_vol(panel, s, d, variant=name)
    raise ValueError(f"{name!r} is not a style factor")


def assemble_loadings(
    panel: PricePanel,
    s: int,
    spec,
    sector_map: Optional[Mapping[str, int]] = None,
    d: int = DEFAULT_WINDOW,
    universe: Optional[Iterable[str]] = None,
) -> LoadingsMatrix:
    """Build the loadings matrix for date ``s``.

    The cross-section is every ticker of ``universe`` (default: all panel
    tickers) for which every requested column is computable. hlv/vol variants
    are rank-normalized over that cross-section; int, prc, rprc and mom are
    used raw. Columns follow the requested order, with the sector block expanded in
    place.

    Raises
    ------
    ValueError
        On an invalid spec or when sectors are requested without a map.
    DataError
        If the cross-section is empty.
    RankDeficientError
        If the columns are linearly dependent.
    """
    names = parse_factor_spec(spec)
    if "sectors" in names and sector_map is None:
        raise ValueError("sector factors requested but no sector map given")

    mask = np.ones(panel.n_tickers, dtype=bool)
    if universe is not None:
        members = set(universe)
        mask &= np.array([t in members for t in panel.tickers], dtype=bool)
    if "sectors" in names:
        mask &= np.array([t in sector_map for t in panel.tickers], dtype=bool)

    raw = {}
    for name in names:
        if name in STYLE_FACTORS:
            raw[name] = raw_factor(panel, s, name, d)
            mask &= np.isfinite(raw[name])
    rows = np.flatnonzero(mask)
    if len(rows) == 0:
        raise DataError(f"empty cross-section on {panel.dates[s]}")
    tickers = tuple(panel.tickers[i] for i in rows)

    blocks, columns = [], []
    for name in names:
        if name == "int":
            blocks.append(beta_int(tickers)[:, None])
            columns.append("int")
        elif name == "sectors":
            matrix, sector_names = sector_loadings(sector_map, tickers)
            blocks.append(matrix)
            columns.extend(sector_names)
        elif name in NORMALIZED_FACTORS:
            blocks.append(normalize_gaussian(raw[name][rows], 0.0)[:, None])
            columns.append(name)
        else:
            blocks.append(raw[name][rows][:, None])
            columns.append(name)
    values = np.hstack(blocks)
    if values.shape[0] < values.shape[1] or np.linalg.matrix_rank(values) < values.shape[1]:
        raise RankDeficientError(
            f"loadings {'+'.join(columns)} are rank deficient on {panel.dates[s]} (n={len(rows)})")
    values.flags.writeable = False
    return LoadingsMatrix(date=panel.dates[s], s=int(s), tickers=tickers, rows=rows,
                          columns=tuple(columns), values=values)
