from fractions import Fraction

import numpy as np
import pandas as pd
import pytest

from overnight_factors import PricePanel, PlantedSpec, generate_synthetic_panel


def make_panel(bars, start="2021-03-01"):
    """Panel from ``{ticker: [(o, h, l, c, adj_close, volume) or None, ...]}``, oldest bar first."""
    tickers = sorted(bars)
    n_dates = len(next(iter(bars.values())))
    chrono = pd.bdate_range(start, periods=n_dates).to_numpy().astype("datetime64[D]")
    arrays = {k: np.full((len(tickers), n_dates), np.nan)
              for k in ("open", "high", "low", "close", "adj_close", "volume")}
    for i, t in enumerate(tickers):
        for j, bar in enumerate(bars[t]):
            if bar is None:
                continue
            s = n_dates - 1 - j
            for key, value in zip(("open", "high", "low", "close", "adj_close", "volume"), bar):
                arrays[key][i, s] = value
    return PricePanel(tickers=tickers, dates=chrono[::-1], **arrays)


def flat_bar(price=100.0, volume=1000.0):
    return (price, price * 1.01, price * 0.99, price, price, volume)


@pytest.fixture(scope="session")
def planted_panel():
    spec = PlantedSpec(noise=0.01)
    return generate_synthetic_panel(120, 90, spec, seed=3)


@pytest.fixture(scope="session")
def plain_panel():
    panel, truth = generate_synthetic_panel(60, 80, None, seed=11)
    return panel, truth


def _bar(o, c, v=1000.0):
    return (o, max(o, c) * 1.01, min(o, c) * 0.99, c, c, v)


def hand_panel():
    """Two stocks, two tradable days; the stock with the larger overnight gap is shorted each day."""
    return make_panel({
        "A": [_bar(10.0, 10.0), _bar(10.2, 10.1), _bar(10.0, 10.3)],
        "B": [_bar(20.0, 20.0), _bar(19.8, 20.0), _bar(20.4, 20.2)],
    })


# exact rational oracle for hand_panel at I = 2e7, oldest trade day first
HAND_PNL = (335000000 / 1683, 20300000 / 51)
HAND_SHARES = (5000000000 / 1683, 152000000 / 51)
HAND_HOLDINGS = ((-1e7, 1e7), (1e7, -1e7))
HAND_ROC = 3.761657754010695187165775401069518716578
HAND_SR = 33.68161995791997938226135354826724747687
HAND_CPS = 10.03294728434504792332268370607028753994


def normal_equations(X, y):
    """Independent oracle: (X'X) f = X'y solved by Gauss-Jordan elimination in exact rationals."""
    X = [[Fraction(float(v)) for v in row] for row in np.asarray(X)]
    y = [Fraction(float(v)) for v in y]
    n, k = len(X), len(X[0])
    a = [[sum(X[r][i] * X[r][j] for r in range(n)) for j in range(k)] + [sum(X[r][i] * y[r] for r in range(n))]
         for i in range(k)]
    for col in range(k):
        piv = next(r for r in range(col, k) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        for r in range(k):
            if r != col:
                factor = a[r][col] / a[col][col]
                a[r] = [x - factor * p for x, p in zip(a[r], a[col])]
    return np.array([float(a[i][k] / a[i][i]) for i in range(k)])


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
