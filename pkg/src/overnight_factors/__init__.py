"""Short-horizon factor model for overnight equity returns.

Factor loadings (int, prc/rprc, mom, hlv*, vol*, sectors) from daily bars,
per-date cross-sectional regressions with Fama-MacBeth serial statistics,
ADDV universe scheduling and an intraday mean-reversion alpha simulator.
"""

from .alpha import (HoldingsDay, ModelComparison, SimReport, compare_models, compute_holdings,
                    plot_cumulative_pnl, simulate)
from .errors import DataError, NumericalError, RankDeficientError
from .factors import (LoadingsMatrix, assemble_loadings, beta_hlv, beta_int, beta_mom, beta_prc,
                      beta_vol, model_label, normalize_gaussian, parse_factor_spec, sector_loadings)
from .market_data import (PricePanel, ReturnPanel, derive_adjusted_open, load_panel, load_sectors,
                          overnight_returns, write_panel, write_sectors)
from .synthetic import PlantedSpec, PlantedTruth, generate_synthetic_panel
from .universe import Interval, UniverseSchedule, addv, build_schedule
from .xsreg import (RegressionDay, SerialStats, fama_macbeth, regress_day, report_table,
                    run_backtest_regressions)

__version__ = "0.1.0"
