"""Study orchestration: scenarios, confidence sweeps, and report emission.

A *scenario* is one data regime for one asset universe: the market panel
itself, a simulated panel with as many rows as the market one (the native
size), and a simulated panel with 1000 rows. Simulated panels draw from a
multivariate normal whose moments are the market estimates treated as truth.

Every study is evaluated in-sample: portfolios are scored on the same panel
they were optimized on. There is no holdout; the reports measure how the
optimizers shape the estimation-window return distribution, nothing more.

Seed discipline: each scenario's seed derives from the run seed via
``SeedSequence(run_seed, spawn_key=(scenario_index,))``; within a scenario,
sub-streams derive from the scenario seed with spawn key 0 for the normal
simulation and 1 for the bootstrap. Reports are therefore a pure function of
(data bytes, config, seed).
"""

from __future__ import annotations

import concurrent.futures
import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from .data import ReturnSample, align_and_log_returns, load_price_directory
from .exceptions import DataError
from .metrics import DEFAULT_DAY_COUNT, evaluate_performance
from .risk import (
    MODEL_CVAR,
    MODEL_VAR,
    MODEL_WCVAR,
    MODEL_WVAR,
    MixtureSpec,
    minimize_cvar,
    minimize_var,
    minimize_wcvar,
    minimize_wvar,
)
from .stats import bootstrap_bounds, estimate_moments, simulate_mvn

logger = logging.getLogger(__name__)

GRID_START = 0.0001
GRID_UPPER = 0.1
DEFAULT_GRID_STEP = 0.002
TABULATION_EPSILONS = (0.0001, 0.0201, 0.0401, 0.0601, 0.0801)
LARGE_SAMPLE_SIZE = 1000
ALLOWED_L_VALUES = (1, 2, 3, 4, 5)

SCENARIO_MARKET = "market"
SCENARIO_SIM_NATIVE = "sim_zeta"
SCENARIO_SIM_LARGE = "sim_1000"

_SUBSTREAM_SIMULATION = 0
_SUBSTREAM_BOOTSTRAP = 1


def epsilon_grid(step: float = DEFAULT_GRID_STEP) -> list[float]:
    """Sweep grid {0.0001 + step*k} strictly inside (0, 0.1)."""
    if step <= 0.0:
        raise ValueError(f"step must be > 0, got {step}")
    grid = []
    k = 0
    while True:
        eps = GRID_START + step * k
        if eps >= GRID_UPPER:
            return grid
        grid.append(eps)
        k += 1


def derive_seed(seed: int, *spawn_key: int) -> int:
    """Deterministic 64-bit child seed for a labelled sub-stream."""
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(spawn_key))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class ScenarioSpec:
    """One data regime to run the studies on.

    ``sample_size`` is an explicit row count for simulated scenarios or None
    for the native size (as many rows as the market panel provides).
    """

    name: str
    data_kind: str  # "market" | "simulated"
    sample_size: int | None
    seed: int
    universe: str
    date_min: object = None
    date_max: object = None

    def __post_init__(self):
        if self.data_kind not in ("market", "simulated"):
            raise ValueError(f"unknown data_kind {self.data_kind!r}")
        if self.data_kind == "simulated" and self.sample_size is not None:
            if self.sample_size < 2:
                raise ValueError("simulated sample_size must be >= 2")


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    model: str
    mean_return: float
    downside_dev: float
    sortino: float


@dataclass(frozen=True)
class LSelectionRow:
    l: int
    avg_sr_cvar: float
    avg_sr_wcvar: float
    diff: float


@dataclass(frozen=True)
class SweepReport:
    """Per-epsilon rows plus the per-model average Sortino columns."""

    scenario: str
    study: str  # "var" | "cvar"
    rows: tuple[SweepRow, ...]
    averages: dict[str, float]
    table_epsilons: tuple[float, ...] = TABULATION_EPSILONS
    l_selection: tuple[LSelectionRow, ...] | None = None
    selected_l: int | None = None
    low_tail_epsilons: tuple[float, ...] = field(default=())

    def models(self) -> list[str]:
        seen = []
        for row in self.rows:
            if row.model not in seen:
                seen.append(row.model)
        return seen

    def table_rows(self) -> list[SweepRow]:
        """The rows at the five tabulation epsilons, in row order."""
        return [
            row for row in self.rows
            if any(abs(row.epsilon - e) < 1e-12 for e in self.table_epsilons)
        ]


def build_scenarios(config) -> list[ScenarioSpec]:
    """Market, native-size simulated, and 1000-row simulated scenario specs.

    ``config`` must provide ``data_dir``, ``seed``, and optional
    ``date_min`` / ``date_max``. Scenario seeds derive from the run seed, so
    two calls with the same config yield identical specs.
    """
    from pathlib import Path

    data_dir = Path(config.data_dir)
    if not data_dir.is_dir():
        raise DataError(f"data directory not found: {data_dir}")
    date_min = getattr(config, "date_min", None)
    date_max = getattr(config, "date_max", None)

    plan = (
        (SCENARIO_MARKET, "market", None),
        (SCENARIO_SIM_NATIVE, "simulated", None),
        (SCENARIO_SIM_LARGE, "simulated", LARGE_SAMPLE_SIZE),
    )
    return [
        ScenarioSpec(
            name=name,
            data_kind=kind,
            sample_size=size,
            seed=derive_seed(config.seed, index),
            universe=str(data_dir),
            date_min=date_min,
            date_max=date_max,
        )
        for index, (name, kind, size) in enumerate(plan)
    ]


def resolve_scenario(spec: ScenarioSpec, market_sample: ReturnSample | None = None) -> ReturnSample:
    """Materialize the return panel a scenario describes.

    Passing the already-loaded market panel avoids re-reading the CSV files
    when resolving the simulated scenarios of the same universe.
    """
    if market_sample is None:
        tables = load_price_directory(spec.universe)
        market_sample = align_and_log_returns(tables, spec.date_min, spec.date_max)
    if spec.data_kind == "market":
        return market_sample
    moments = estimate_moments(market_sample)
    n_rows = spec.sample_size if spec.sample_size is not None else market_sample.n_periods
    return simulate_mvn(moments, n_rows, seed=derive_seed(spec.seed, _SUBSTREAM_SIMULATION),
                        assets=market_sample.assets)


def _parallel_map(fn, items, threads):
    if threads is None or threads <= 1:
        return [fn(item) for item in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _performance_rows(sample, portfolios, model, rf, day_count, target):
    rows = []
    for portfolio in portfolios:
        record = evaluate_performance(sample, portfolio, annual_rf=rf,
                                      day_count=day_count, target=target)
        rows.append(SweepRow(
            epsilon=portfolio.epsilon,
            model=model,
            mean_return=record.mean_return,
            downside_dev=record.downside_dev,
            sortino=record.sortino,
        ))
    return rows


def _average_sortino(rows) -> float:
    return float(np.mean([row.sortino for row in rows]))


def select_block_count(selection) -> int:
    """Block count with the maximum worst-case-minus-base average-Sortino gap.

    Ties break toward the smaller count so reruns are reproducible.
    """
    if not selection:
        raise ValueError("empty selection table")
    best = max(selection, key=lambda row: (row.diff, -row.l))
    return best.l


def run_var_study(scenario: ScenarioSpec, rf: float = 0.06, *,
                  sample: ReturnSample | None = None,
                  grid_step: float = DEFAULT_GRID_STEP,
                  kappa_kind: str = "chebyshev",
                  bootstrap_b: int = 1000,
                  bootstrap_confidence: float = 0.95,
                  day_count: float = DEFAULT_DAY_COUNT,
                  sortino_target: str = "risk_free",
                  threads: int = 1) -> SweepReport:
    """Sweep epsilon over the grid solving the VaR and worst-case VaR models.

    Bootstrap bounds are computed once per scenario, on the scenario's own
    sample (simulated scenarios re-bootstrap the simulated rows). Both
    portfolios are scored in-sample.
    """
    if sample is None:
        sample = resolve_scenario(scenario)
    moments = estimate_moments(sample)
    bounds = bootstrap_bounds(sample, confidence=bootstrap_confidence,
                              resamples=bootstrap_b,
                              seed=derive_seed(scenario.seed, _SUBSTREAM_BOOTSTRAP))
    grid = epsilon_grid(grid_step)

    def solve_pair(eps):
        return (minimize_var(moments, eps, kappa_kind),
                minimize_wvar(moments, bounds, eps, kappa_kind))

    pairs = _parallel_map(solve_pair, grid, threads)
    var_rows = _performance_rows(sample, [p for p, _ in pairs], MODEL_VAR,
                                 rf, day_count, sortino_target)
    wvar_rows = _performance_rows(sample, [p for _, p in pairs], MODEL_WVAR,
                                  rf, day_count, sortino_target)
    return SweepReport(
        scenario=scenario.name,
        study="var",
        rows=tuple(var_rows + wvar_rows),
        averages={
            MODEL_VAR: _average_sortino(var_rows),
            MODEL_WVAR: _average_sortino(wvar_rows),
        },
    )


def run_cvar_study(scenario: ScenarioSpec, rf: float = 0.06,
                   l_values=(2, 3, 4, 5), *,
                   sample: ReturnSample | None = None,
                   grid_step: float = DEFAULT_GRID_STEP,
                   day_count: float = DEFAULT_DAY_COUNT,
                   sortino_target: str = "risk_free",
                   threads: int = 1) -> SweepReport:
    """Sweep epsilon for the CVaR model and the worst-case variant per block count.

    The block count is then selected by the maximum difference in average
    Sortino ratio (worst-case minus base); the report carries the full rows
    for the selected count plus the comparison table. Ties go to the smaller
    count.
    """
    l_values = tuple(int(l) for l in l_values)
    if not l_values or any(l not in ALLOWED_L_VALUES for l in l_values):
        raise ValueError(f"l_values must be a non-empty subset of {ALLOWED_L_VALUES}")
    if sample is None:
        sample = resolve_scenario(scenario)
    grid = epsilon_grid(grid_step)

    low_tail = tuple(eps for eps in grid if sample.n_periods * eps < 1.0)
    if low_tail:
        logger.warning(
            "%s: %d epsilon value(s) give S*eps < 1; tail average degenerates "
            "toward the maximum loss there", scenario.name, len(low_tail)
        )

    cvar_ports = _parallel_map(lambda eps: minimize_cvar(sample, eps), grid, threads)
    cvar_rows = _performance_rows(sample, cvar_ports, MODEL_CVAR,
                                  rf, day_count, sortino_target)
    avg_cvar = _average_sortino(cvar_rows)

    selection = []
    wcvar_rows_by_l = {}
    for l in l_values:
        mix = MixtureSpec.chronological(sample.n_periods, l)
        ports = _parallel_map(lambda eps: minimize_wcvar(sample, eps, mix),
                              grid, threads)
        rows = _performance_rows(sample, ports, MODEL_WCVAR,
                                 rf, day_count, sortino_target)
        wcvar_rows_by_l[l] = rows
        avg_wcvar = _average_sortino(rows)
        selection.append(LSelectionRow(l=l, avg_sr_cvar=avg_cvar,
                                       avg_sr_wcvar=avg_wcvar,
                                       diff=avg_wcvar - avg_cvar))

    selected = select_block_count(selection)
    selected_rows = wcvar_rows_by_l[selected]
    return SweepReport(
        scenario=scenario.name,
        study="cvar",
        rows=tuple(cvar_rows + selected_rows),
        averages={
            MODEL_CVAR: avg_cvar,
            MODEL_WCVAR: _average_sortino(selected_rows),
        },
        l_selection=tuple(selection),
        selected_l=selected,
        low_tail_epsilons=low_tail,
    )


# ---------------------------------------------------------------------------
# CSV emission (all floats with 6 significant digits)
# ---------------------------------------------------------------------------


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def write_rows_csv(report: SweepReport, path) -> None:
    """`epsilon,model,mu,sigma_d,sortino` rows ordered by (model, epsilon)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epsilon", "model", "mu", "sigma_d", "sortino"])
        for row in report.rows:
            writer.writerow([_fmt(row.epsilon), row.model, _fmt(row.mean_return),
                             _fmt(row.downside_dev), _fmt(row.sortino)])


def write_lselect_csv(report: SweepReport, path) -> None:
    """`l,avg_sr_cvar,avg_sr_wcvar,diff` comparison of the block counts."""
    if report.l_selection is None:
        raise ValueError("report carries no block-count selection table")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["l", "avg_sr_cvar", "avg_sr_wcvar", "diff"])
        for row in report.l_selection:
            writer.writerow([row.l, _fmt(row.avg_sr_cvar), _fmt(row.avg_sr_wcvar),
                             _fmt(row.diff)])


def write_summary_csv(reports: list[SweepReport], path) -> None:
    """Average Sortino per model (rows) across scenarios (columns)."""
    scenarios = []
    for report in reports:
        if report.scenario not in scenarios:
            scenarios.append(report.scenario)
    model_columns: dict[str, dict[str, float]] = {}
    for report in reports:
        for model, avg in report.averages.items():
            model_columns.setdefault(model, {})[report.scenario] = avg

    order = [m for m in (MODEL_VAR, MODEL_WVAR, MODEL_CVAR, MODEL_WCVAR)
             if m in model_columns]
    order += [m for m in model_columns if m not in order]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model"] + scenarios)
        for model in order:
            cells = [model]
            for scenario in scenarios:
                value = model_columns[model].get(scenario)
                cells.append("" if value is None else _fmt(value))
            writer.writerow(cells)
