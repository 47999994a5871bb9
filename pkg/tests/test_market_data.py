import math

import numpy as np
import pytest

from overnight_factors import (DataError, derive_adjusted_open, load_panel, overnight_returns,
                               write_panel)
from overnight_factors.market_data import BAR_COLUMNS

from conftest import make_panel

HEADER = ",".join(BAR_COLUMNS) + "\n"


def write(tmp_path, body, header=HEADER):
    path = tmp_path / "bars.csv"
    path.write_text(header + body)
    return path


def test_complete_file_gives_all_valid_cells(tmp_path):
    body = "".join(f"2020-01-0{d},{t},10,11,9,10,10,100\n" for d in (2, 3, 6) for t in ("AAA", "BBB"))
    panel = load_panel(write(tmp_path, body))
    assert panel.tickers == ("AAA", "BBB")
    assert panel.valid.shape == (2, 3)
    assert panel.valid.sum() == 6
    # most recent date first
    assert str(panel.dates[0]) == "2020-01-06"
    assert str(panel.dates[-1]) == "2020-01-02"


def test_high_below_low_masks_one_cell(tmp_path):
    body = ("2020-01-02,AAA,10,11,9,10,10,100\n"
            "2020-01-02,BBB,10,8,9,10,10,100\n"
            "2020-01-03,AAA,10,11,9,10,10,100\n"
            "2020-01-03,BBB,10,11,9,10,10,100\n")
    panel = load_panel(write(tmp_path, body))
    assert panel.valid.tolist() == [[True, True], [True, False]]


def test_gap_masks_cell_and_return(tmp_path):
    body = ("2020-01-02,AAA,10,11,9,10,10,100\n"
            "2020-01-03,AAA,10,11,9,10,10,100\n"
            "2020-01-06,AAA,10,11,9,10,10,100\n"
            "2020-01-02,BBB,10,11,9,10,10,100\n"
            "2020-01-06,BBB,10,11,9,10,10,100\n")
    panel = load_panel(write(tmp_path, body))
    assert not panel.valid[1, 1]
    r = overnight_returns(panel)
    assert np.isnan(r.values[1, 0]) and np.isnan(r.values[1, 1])
    assert r.values[0, 0] == 0.0 and r.values[0, 1] == 0.0
    assert np.isnan(r.values[:, -1]).all()


def test_ticker_filter(tmp_path):
    body = "2020-01-02,AAA,10,11,9,10,10,100\n2020-01-02,BBB,10,11,9,10,10,100\n"
    panel = load_panel(write(tmp_path, body), tickers={"BBB"})
    assert panel.tickers == ("BBB",)


@pytest.mark.parametrize("header,body", [
    ("date,ticker,open,high,low,close,volume\n", "2020-01-02,AAA,10,11,9,10,100\n"),
    (HEADER, "2020-01-02,AAA,10,11,9,10,10,100\n2020-01-02,AAA,10,11,9,10,10,100\n"),
    (HEADER, "02/01/2020,AAA,10,11,9,10,10,100\n"),
])
def test_load_errors(tmp_path, header, body):
    with pytest.raises(DataError):
        load_panel(write(tmp_path, body, header))


def test_unreadable_file(tmp_path):
    with pytest.raises(DataError):
        load_panel(tmp_path / "missing.csv")


def test_non_numeric_field_is_masked_not_fatal(tmp_path):
    body = "2020-01-02,AAA,10,11,9,abc,10,100\n2020-01-02,BBB,10,11,9,10,10,100\n"
    panel = load_panel(write(tmp_path, body))
    assert panel.valid[:, 0].tolist() == [False, True]


@pytest.mark.parametrize("o,c,ac,expected", [
    (50.0, 100.0, 100.0, 50.0),
    (50.0, 100.0, 50.0, 25.0),
    (102.0, 99.0, 33.0, 34.0),
])
def test_derive_adjusted_open(o, c, ac, expected):
    panel = make_panel({"A": [(o, max(o, c) + 1, min(o, c) - 1, c, ac, 10.0)]})
    adj = derive_adjusted_open(panel)
    assert adj.adj_open[0, 0] == pytest.approx(expected, rel=1e-15)
    assert adj.adj_open[0, 0] / o == pytest.approx(ac / c, rel=1e-15)


@pytest.mark.parametrize("adj_open,prev_adj_close,expected", [
    (100.0, 100.0, 0.0),
    (101.0, 100.0, 0.00995033085316808284821535754425),
])
def test_overnight_return_values(adj_open, prev_adj_close, expected):
    panel = make_panel({"A": [(prev_adj_close, prev_adj_close, prev_adj_close, prev_adj_close,
                               prev_adj_close, 1.0),
                              (adj_open, adj_open, adj_open, adj_open, adj_open, 1.0)]})
    r = overnight_returns(panel)
    assert r.values[0, 0] == pytest.approx(expected, abs=1e-15)


def test_overnight_return_uses_adjusted_prices():
    # 2:1 split between the two days, vendor back-adjusts day one's close
    panel = make_panel({"A": [(100.0, 101.0, 99.0, 100.0, 50.0, 1.0),
                              (50.5, 51.0, 50.0, 50.0, 50.0, 1.0)]})
    assert overnight_returns(panel).values[0, 0] == pytest.approx(math.log(1.01), abs=1e-15)


def test_returns_invariant_to_ticker_adjustment_scale():
    rng = np.random.default_rng(0)
    c = 50 * np.exp(np.cumsum(rng.normal(0, 0.02, 10)))
    o = c * np.exp(rng.normal(0, 0.01, 10))
    bars = [(oi, max(oi, ci) * 1.01, min(oi, ci) * 0.99, ci, ci * 0.8, 100.0) for oi, ci in zip(o, c)]
    scaled = [(b[0], b[1], b[2], b[3], b[4] * 0.37, b[5]) for b in bars]
    r1 = overnight_returns(make_panel({"A": bars})).values
    r2 = overnight_returns(make_panel({"A": scaled})).values
    np.testing.assert_allclose(r1[:, :-1], r2[:, :-1], rtol=0, atol=1e-14)


def test_panel_round_trip_bit_exact(tmp_path, plain_panel):
    panel, _ = plain_panel
    p1 = tmp_path / "a.csv"
    write_panel(panel, p1)
    again = load_panel(p1)
    assert again.tickers == panel.tickers
    assert np.array_equal(again.dates, panel.dates)
    assert np.array_equal(again.valid, panel.valid)
    for name in ("open", "high", "low", "close", "adj_close", "volume"):
        a, b = getattr(panel, name), getattr(again, name)
        assert np.array_equal(a[panel.valid], b[panel.valid])
    p2 = tmp_path / "b.csv"
    write_panel(again, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_panel_is_immutable(plain_panel):
    panel, _ = plain_panel
    with pytest.raises(ValueError):
        panel.close[0, 0] = 1.0
