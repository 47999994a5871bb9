import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from overnight_factors import (DataError, NumericalError, build_schedule, compare_models, compute_holdings,
                               plot_cumulative_pnl, simulate)
from overnight_factors.alpha import summarize

from conftest import (HAND_CPS, HAND_HOLDINGS, HAND_PNL, HAND_ROC, HAND_SHARES, HAND_SR, _bar, hand_panel,
                      make_panel)

SIM_MODELS = ["int", "int,prc,mom,hlv,vol", "S", "S,prc,mom,hlv,vol", "int,rprc,mom,hlv,vol1",
          "S,rprc,mom,hlv,vol1"]


def test_holdings_pair():
    np.testing.assert_array_equal(compute_holdings([1.0, -1.0], 10.0, normalize=False).holdings, [-5.0, 5.0])


def test_holdings_triple():
    np.testing.assert_array_equal(compute_holdings([2.0, -1.0, -1.0], 12.0, normalize=False).holdings,
                                  [-6.0, 3.0, 3.0])


def test_holdings_all_zero():
    with pytest.raises(NumericalError):
        compute_holdings(np.zeros(4), 1.0, normalize=False)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1.0, 1.0, allow_nan=False), min_size=2, max_size=60),
       st.booleans(), st.floats(1.0, 1e9))
def test_gross_and_neutral(raw, normalize, level):
    e = np.array(raw) - np.mean(raw)
    if np.ptp(e) < 1e-9:
        return
    h = compute_holdings(e, level, normalize=normalize).holdings
    assert abs(np.abs(h).sum() - level) <= 1e-8 * level
    assert abs(h.sum()) <= 1e-8 * level


def test_single_pnl_term():
    # H = 100 on a stock whose close is 1% above its open
    assert 100.0 * (1.01 / 1.0 - 1.0) == pytest.approx(1.0, rel=1e-12)


def test_hand_oracle():
    panel = hand_panel()
    sch = build_schedule(panel, top_n=2, addv_window=1, lookback=1)
    rep = simulate(panel, sch, "int", investment_level=2e7, normalize=True)
    np.testing.assert_allclose(rep.daily_pnl, HAND_PNL, rtol=1e-12)
    np.testing.assert_allclose(rep.daily_shares, HAND_SHARES, rtol=1e-12)
    for book, expected in zip(rep.holdings, HAND_HOLDINGS):
        np.testing.assert_allclose(book.holdings, expected, rtol=1e-12)
    assert rep.roc == pytest.approx(HAND_ROC, rel=1e-12)
    assert rep.sharpe == pytest.approx(HAND_SR, rel=1e-12)
    assert rep.cps == pytest.approx(HAND_CPS, rel=1e-12)


def test_flat_days():
    gaps = [1.0, 1.01, 0.995, 1.02]
    bars = {}
    for k, g in enumerate(gaps):
        price, seq = 10.0 * (k + 1), []
        for _ in range(4):
            seq.append(_bar(price, price))
            price *= g
        bars[f"X{k}"] = [seq[0]] + [_bar(b[3] * g, b[3] * g) for b in seq[:-1]]
    panel = make_panel(bars)
    sch = build_schedule(panel, top_n=4, addv_window=1, lookback=1)
    rep = simulate(panel, sch, "int", investment_level=1e6)
    assert np.all(rep.daily_pnl == 0.0)
    assert rep.cps == 0.0 and rep.roc == 0.0
    assert math.isnan(rep.sharpe) and not rep.sharpe_defined


def test_summarize_empty():
    with pytest.raises(DataError):
        summarize("m", [], [], [], [], 1.0)


def test_scale_invariance(planted_panel):
    panel, truth = planted_panel
    sch = build_schedule(panel, top_n=80)
    a = simulate(panel, sch, "int,prc,mom,hlv,vol", investment_level=2e7)
    b = simulate(panel, sch, "int,prc,mom,hlv,vol", investment_level=2e10)
    np.testing.assert_allclose(b.daily_pnl, 1000 * a.daily_pnl, rtol=1e-10)
    np.testing.assert_allclose(b.daily_shares, 1000 * a.daily_shares, rtol=1e-10)
    for key in ("roc", "sharpe", "cps"):
        assert getattr(b, key) == pytest.approx(getattr(a, key), rel=1e-10)


def test_unnormalized_holdings_orthogonal_to_ones(planted_panel):
    panel, _ = planted_panel
    sch = build_schedule(panel, top_n=80)
    rep = simulate(panel, sch, "int,mom", normalize=False)
    for book in rep.holdings:
        assert abs(book.holdings.sum()) <= 1e-8 * rep.investment_level


def test_models_and_determinism(planted_panel):
    panel, truth = planted_panel
    sch = build_schedule(panel, top_n=100)
    cmp_ = compare_models(panel, sch, ["int", "int,prc,mom,hlv,vol", "int", "S"],
                          sector_map=truth.sector_map)
    table = cmp_.table()
    assert list(table.columns) == ["Model", "ROC", "SR", "CPS"]
    assert list(table.Model) == ["int only", "int+prc+mom+hlv+vol", "int only", "S only"]
    assert table.iloc[0].tolist() == table.iloc[2].tolist()
    curves = cmp_.cumulative()
    assert len(curves) == 4
    assert all(len(c) == len(r.dates) for c, r in zip(curves, cmp_.reports))
    assert all(np.any(r.daily_pnl != 0) for r in cmp_.reports)
    with pytest.raises(ValueError):
        compare_models(panel, sch, [])


def test_svg_deterministic(planted_panel, tmp_path):
    panel, truth = planted_panel
    sch = build_schedule(panel, top_n=60)
    cmp_ = compare_models(panel, sch, SIM_MODELS, sector_map=truth.sector_map)
    plot_cumulative_pnl(cmp_, tmp_path / "a.svg")
    plot_cumulative_pnl(cmp_, tmp_path / "b.svg")
    text = (tmp_path / "a.svg").read_text()
    assert text == (tmp_path / "b.svg").read_text()
    assert text.count("<path") >= 6
    assert "$20M gross" in text
