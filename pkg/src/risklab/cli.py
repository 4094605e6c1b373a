"""Command-line front end: ``risklab run | plotdata | version``.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 solver error.
Every failure prints one machine-parseable line to stderr with a
``config-error:`` / ``data-error:`` / ``solver-error:`` prefix.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from pathlib import Path

from . import __version__
from .config import RunConfig, parse_config
from .data import align_and_log_returns, load_price_directory
from .exceptions import ConfigError, DataError, SolverError
from .experiment import (
    build_scenarios,
    resolve_scenario,
    run_cvar_study,
    run_var_study,
    write_lselect_csv,
    write_rows_csv,
    write_summary_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_SOLVER = 3

THREADS_ENV_VAR = "RISKLAB_THREADS"


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None:
        return 1
    try:
        threads = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}") from None
    if threads < 1:
        raise ConfigError(f"{THREADS_ENV_VAR} must be >= 1, got {threads}")
    return threads


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def cmd_run(config_path) -> int:
    """Execute every scenario's VaR and CVaR studies and write all reports."""
    config = parse_config(config_path)
    threads = _thread_count()

    out_dir = Path(config.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create out_dir {out_dir}: {exc}") from exc

    data_files = sorted(Path(config.data_dir).glob("*.csv")) if Path(config.data_dir).is_dir() else []
    tables = load_price_directory(config.data_dir)
    market = align_and_log_returns(tables, config.date_min, config.date_max)
    scenarios = build_scenarios(config)

    reports = []
    for scenario in scenarios:
        sample = resolve_scenario(scenario, market_sample=market)
        var_report = run_var_study(
            scenario, config.annual_rf, sample=sample,
            grid_step=config.grid_step, kappa_kind=config.kappa_kind,
            bootstrap_b=config.bootstrap_b,
            bootstrap_confidence=config.bootstrap_confidence,
            day_count=config.day_count, sortino_target=config.sortino_target,
            threads=threads,
        )
        cvar_report = run_cvar_study(
            scenario, config.annual_rf, config.l_values, sample=sample,
            grid_step=config.grid_step, day_count=config.day_count,
            sortino_target=config.sortino_target, threads=threads,
        )
        write_rows_csv(var_report, out_dir / f"{scenario.name}_var_rows.csv")
        write_rows_csv(cvar_report, out_dir / f"{scenario.name}_cvar_rows.csv")
        write_lselect_csv(cvar_report, out_dir / f"{scenario.name}_cvar_lselect.csv")
        reports.extend([var_report, cvar_report])

    write_summary_csv(reports, out_dir / "summary.csv")

    manifest = {
        "version": __version__,
        "config": config.as_dict(),
        "scenarios": [
            {
                "name": s.name,
                "data_kind": s.data_kind,
                "sample_size": s.sample_size,
                "seed": s.seed,
                "selected_l": next(
                    (r.selected_l for r in reports
                     if r.scenario == s.name and r.study == "cvar"), None
                ),
            }
            for s in scenarios
        ],
        "data_checksums": {p.name: _sha256(p) for p in data_files},
        "market_panel": {
            "assets": list(market.assets),
            "n_periods": market.n_periods,
            "first_date": market.dates[0],
            "last_date": market.dates[-1],
        },
    }
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return EXIT_OK


def cmd_plotdata(rows_csv, out_csv) -> int:
    """Pivot a rows CSV into per-model Sortino columns sorted by epsilon."""
    try:
        with open(rows_csv, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"epsilon", "model", "sortino"} <= set(reader.fieldnames):
                raise DataError(f"{rows_csv}: expected epsilon,model,...,sortino header")
            records = []
            for record in reader:
                try:
                    records.append((float(record["epsilon"]), record["model"],
                                    float(record["sortino"])))
                except (TypeError, ValueError, KeyError):
                    raise DataError(f"{rows_csv}: malformed row {record}") from None
    except OSError as exc:
        raise DataError(f"cannot read {rows_csv}: {exc}") from exc
    if not records:
        raise DataError(f"{rows_csv}: no data rows")

    models = []
    for _, model, _ in records:
        if model not in models:
            models.append(model)
    series: dict[float, dict[str, float]] = {}
    for eps, model, sortino in records:
        series.setdefault(eps, {})[model] = sortino

    with open(out_csv, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epsilon"] + [f"sr_{m}" for m in models])
        for eps in sorted(series):
            row = [f"{eps:.6g}"]
            for model in models:
                value = series[eps].get(model)
                row.append("" if value is None else f"{value:.6g}")
            writer.writerow(row)
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="risklab",
        description="Downside-risk portfolio studies: VaR/CVaR and their worst-case variants.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="execute the studies described by a config file")
    run_parser.add_argument("config", help="path to the run configuration file")

    plot_parser = sub.add_parser("plotdata", help="pivot a rows CSV into plot-ready columns")
    plot_parser.add_argument("rows_csv", help="input <scenario>_<study>_rows.csv")
    plot_parser.add_argument("out_csv", help="output pivot CSV")

    sub.add_parser("version", help="print the package version")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args.config)
        if args.command == "plotdata":
            return cmd_plotdata(args.rows_csv, args.out_csv)
        print(__version__)
        return EXIT_OK
    except ConfigError as exc:
        print(f"config-error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data-error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SolverError as exc:
        print(f"solver-error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
