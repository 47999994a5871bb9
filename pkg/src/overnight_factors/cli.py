"""Command line entry point: ``overnight-factors {stats,sim,synth,universe}``.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numerical error.
All artifacts are written only after the computation has succeeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys

from .alpha import compare_models, plot_cumulative_pnl
from .config import CONFIG_KEYS, ConfigError, RunConfig, load_config
from .errors import DataError, NumericalError
from .factors import model_label
from .market_data import load_panel, load_sectors, write_panel, write_sectors
from .synthetic import PlantedSpec, generate_synthetic_panel
from .universe import build_schedule
from .xsreg import fama_macbeth, report_table, run_backtest_regressions

logger = logging.getLogger("overnight_factors")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _RunLog(logging.Handler):
    """Collects log lines (no timestamps) for ``run.log``."""

    def __init__(self):
        super().__init__(logging.INFO)
        self.lines = []

    def emit(self, record):
        self.lines.append(f"{record.levelname}: {record.getMessage()}")


def _fmt(x) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "NA"
    return f"{x:.6g}" if isinstance(x, float) else str(x)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _warn_conventions(spec):
    names = set(spec)
    if "prc" in names and "vol" in names:
        logger.warning("%s mixes adjusted prc with unadjusted vol; vol1 is the matching volume",
                       model_label(spec))
    if "rprc" in names and "vol1" in names:
        logger.warning("%s mixes unadjusted rprc with adjusted vol1; vol is the matching volume",
                       model_label(spec))


def _load_inputs(config: RunConfig):
    """Panel and optional sector map for ``stats``/``sim``/``universe``."""
    if config.synthetic:
        planted = None if config.planted is None else PlantedSpec(factors=config.planted, noise=config.noise,
                                                                  window=config.d)
        panel, truth = generate_synthetic_panel(config.n_tickers, config.n_dates, planted,
                                                seed=config.seed, n_sectors=config.n_sectors)
        return panel, truth.sector_map
    if not config.data:
        raise ConfigError("no data file given (set 'data' or 'synthetic = yes')")
    if not os.path.isfile(config.data):
        raise DataError(f"data file not found: {config.data}")
    sector_map = None
    if config.sectors:
        if not os.path.isfile(config.sectors):
            raise DataError(f"sector file not found: {config.sectors}")
        sector_map = load_sectors(config.sectors)
    # tickers without a sector assignment are excluded everywhere when a sector file is given
    panel = load_panel(config.data, tickers=None if sector_map is None else set(sector_map))
    logger.info("loaded %d tickers x %d dates (%d valid bars)", panel.n_tickers, panel.n_dates,
                int(panel.valid.sum()))
    return panel, sector_map


def _require_sectors(config: RunConfig, sector_map):
    if sector_map is None and any("sectors" in spec for spec in config.models):
        raise ConfigError("sector models need a sector file (set 'sectors')")


def _schedule(panel, config: RunConfig):
    return build_schedule(panel, top_n=config.top_n, rebalance_period=config.rebalance_period,
                          addv_window=config.addv_window, rank_range=config.rank_range,
                          start=config.start, end=config.end, lookback=max(config.d, config.addv_window))


def _write_outputs(directory, files: dict):
    os.makedirs(directory, exist_ok=True)
    for name, content in files.items():
        path = os.path.join(directory, name)
        if callable(content):
            content(path)
        else:
            with open(path, "w", newline="") as fh:
                fh.write(content)


def cmd_stats(config: RunConfig) -> dict:
    panel, sector_map = _load_inputs(config)
    _require_sectors(config, sector_map)
    schedule = _schedule(panel, config)
    results, fr_rows, resid_rows = [], [], []
    columns = []
    for spec in config.models:
        _warn_conventions(spec)
        label = model_label(spec)
        skipped = []
        days = run_backtest_regressions(panel, schedule, spec, d=config.d, sector_map=sector_map,
                                        skipped=skipped)
        for date, reason in skipped:
            logger.info("%s: skipped %s (%s)", label, date, reason)
        stats = fama_macbeth(days, model=label)
        logger.info("%s: %d regression dates, %d skipped", label, stats.dates_used, len(skipped))
        results.append((label, stats))
        columns.extend(c for c in stats.columns if c not in columns)
        for day in days:
            fr_rows.append((str(day.date), label, day.factor_returns))
            if config.residuals:
                resid_rows.extend((str(day.date), label, t, repr(float(e)))
                                  for t, e in zip(day.tickers, day.residuals))
    files = {
        "factor_returns.csv": _csv_text(
            ["date", "model", *columns],
            [[d, m, *(repr(f[c]) if c in f else "" for c in columns)] for d, m, f in fr_rows]),
        "stats.csv": report_table(results, layout=config.layout),
    }
    if config.residuals:
        files["residuals.csv"] = _csv_text(["date", "model", "ticker", "residual"], resid_rows)
    return files


def cmd_sim(config: RunConfig) -> dict:
    panel, sector_map = _load_inputs(config)
    _require_sectors(config, sector_map)
    schedule = _schedule(panel, config)
    for spec in config.models:
        _warn_conventions(spec)
    comparison = compare_models(panel, schedule, list(config.models), config.investment,
                                normalize=config.normalize, d=config.d, sector_map=sector_map)
    table = comparison.table()
    summary = _csv_text(["Model", "ROC", "SR", "CPS"],
                        [[row.Model, _fmt(row.ROC), _fmt(row.SR), _fmt(row.CPS)]
                         for row in table.itertuples(index=False)])
    dates = sorted({str(d) for r in comparison.reports for d in r.dates})
    by_model = [dict(zip((str(d) for d in r.dates), r.daily_pnl.tolist())) for r in comparison.reports]
    pnl = _csv_text(["date", *(r.model for r in comparison.reports)],
                    [[d, *(repr(m[d]) if d in m else "" for m in by_model)] for d in dates])
    for r in comparison.reports:
        logger.info("%s: ROC %.4f%%, SR %s, CPS %s over %d days", r.model, 100 * r.roc,
                    _fmt(r.sharpe), _fmt(r.cps), len(r.dates))
    title = "Intraday mean-reversion alpha" + ("" if config.normalize else " (residuals not normalized)")
    return {
        "sim_summary.csv": summary,
        "pnl_daily.csv": pnl,
        "pnl.svg": lambda path: plot_cumulative_pnl(comparison, path, title=title),
    }


def cmd_synth(config: RunConfig) -> dict:
    planted = None
    if config.planted is not None:
        planted = PlantedSpec(factors=config.planted, noise=config.noise, window=config.d)
    try:
        panel, truth = generate_synthetic_panel(config.n_tickers, config.n_dates, planted,
                                                seed=config.seed, n_sectors=config.n_sectors)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    files = {
        "panel.csv": lambda path: write_panel(panel, path),
        "sectors.csv": lambda path: write_sectors(truth.sector_map, path),
    }
    if planted is not None:
        files["truth_factor_returns.csv"] = truth.factor_frame().to_csv(index=False, float_format="%.17g",
                                                                        lineterminator="\n")
        files["truth_loadings.csv"] = truth.loadings_frame().to_csv(index=False, float_format="%.17g",
                                                                    lineterminator="\n")
    logger.info("generated %d tickers x %d dates, planted=%s", panel.n_tickers, panel.n_dates,
                "none" if planted is None else ",".join(planted.factors))
    return files


def cmd_universe(config: RunConfig) -> dict:
    panel, _ = _load_inputs(config)
    schedule = _schedule(panel, config)
    logger.info("%d intervals", len(schedule.intervals))
    return {"universe.csv": schedule.to_frame(panel).to_csv(index=False, lineterminator="\n")}


COMMANDS = {"stats": cmd_stats, "sim": cmd_sim, "synth": cmd_synth, "universe": cmd_universe}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="overnight-factors", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=name in ("stats", "sim"), help="flat key = value config file")
        for key in CONFIG_KEYS:
            p.add_argument("--" + key.replace("_", "-"), dest="opt_" + key, metavar=key.upper(),
                           help=f"override config key '{key}'")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k[4:]: v for k, v in vars(args).items() if k.startswith("opt_") and v is not None}
    log = _RunLog()
    logger.addHandler(log)
    logger.setLevel(logging.INFO)
    stderr = logging.StreamHandler(sys.stderr)
    stderr.setLevel(logging.WARNING)
    logger.addHandler(stderr)
    try:
        try:
            config = load_config(args.config, overrides)
        except ConfigError as exc:
            print(f"overnight-factors: {exc}", file=sys.stderr)
            return EXIT_USAGE
        for line in config.echo():
            logger.info("config %s", line)
        try:
            files = COMMANDS[args.command](config)
        except ConfigError as exc:
            print(f"overnight-factors: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except DataError as exc:
            print(f"overnight-factors: data error: {exc}", file=sys.stderr)
            return EXIT_DATA
        except (NumericalError, ArithmeticError) as exc:
            print(f"overnight-factors: numerical error: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        except ValueError as exc:
            print(f"overnight-factors: {exc}", file=sys.stderr)
            return EXIT_USAGE
        _write_outputs(config.output, files)
        with open(os.path.join(config.output, "run.log"), "w") as fh:
            fh.write("\n".join(log.lines) + "\n")
        return EXIT_OK
    finally:
        logger.removeHandler(log)
        logger.removeHandler(stderr)


if __name__ == "__main__":
    sys.exit(main())
