"""
Intraday mean reversion on overnight residuals
==============================================

Trade against each model's residuals at the open, flatten at the close, and
compare return on capital, Sharpe ratio and cents per share.
"""

from pathlib import Path

from overnight_factors import (PlantedSpec, build_schedule, compare_models, generate_synthetic_panel,
                               plot_cumulative_pnl)

panel, truth = generate_synthetic_panel(400, 200, PlantedSpec(), seed=4)
schedule = build_schedule(panel, top_n=300)

models = ["int", "int,prc,mom,hlv,vol", "S", "S,prc,mom,hlv,vol"]
comparison = compare_models(panel, schedule, models, investment_level=2e7, sector_map=truth.sector_map)
print(comparison.table().round(3).to_string(index=False))

#############################################################################
# Every book is dollar neutral with gross exposure I.
book = comparison.reports[1].holdings[0]
print("net %.2e  gross %.0f" % (book.holdings.sum(), abs(book.holdings).sum()))

#############################################################################
# Without the rank-to-normal step the residuals are traded as they are.
raw = compare_models(panel, schedule, models, sector_map=truth.sector_map, normalize=False)
print(raw.table().round(3).to_string(index=False))

#############################################################################
# Cumulative P&L curves, one per model.
out = Path("pnl_demo.svg")
plot_cumulative_pnl(comparison, out)
print("wrote", out.resolve())
