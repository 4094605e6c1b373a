"""Price loading, date alignment, and log-return construction.

Every downstream model consumes a :class:`ReturnSample`: a T x N matrix of
per-period log-returns where the rows are the trading dates common to all
assets. Alignment is a strict date intersection, so one asset with sparse
quotes shrinks the panel rather than introducing NaNs.
"""

from __future__ import annotations

import csv
import datetime as dt
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import DataError

logger = logging.getLogger(__name__)

DATE_COLUMN = "date"
PRICE_COLUMN = "adj close"


@dataclass(frozen=True)
class PriceTable:
    """Cleaned per-asset price history.

    Dates are strictly increasing, prices strictly positive and finite.
    """

    asset_id: str
    dates: tuple[dt.date, ...]
    prices: tuple[float, ...]

    def __post_init__(self):
        if len(self.dates) != len(self.prices):
            raise DataError(f"{self.asset_id}: dates/prices length mismatch")
        for d0, d1 in zip(self.dates, self.dates[1:]):
            if d1 <= d0:
                raise DataError(f"{self.asset_id}: dates not strictly increasing at {d1}")
        for p in self.prices:
            if not math.isfinite(p) or p <= 0.0:
                raise DataError(f"{self.asset_id}: non-positive or non-finite price {p}")

    def __len__(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class ReturnSample:
    """Aligned T x N panel of per-period log-returns.

    ``returns[t, j] = ln(P[t+1, j] / P[t, j])`` over the common dates, and
    ``dates[t]`` is the period-end label of row ``t``. The matrix is frozen
    (read-only) after construction and safe to share across threads.
    """

    assets: tuple[str, ...]
    dates: tuple[str, ...]
    returns: np.ndarray = field(repr=False)

    def __post_init__(self):
        r = np.asarray(self.returns, dtype=float)
        if r.ndim != 2:
            raise DataError("returns must be a 2-D matrix")
        t, n = r.shape
        if t < 1 or n < 1:
            raise DataError(f"returns matrix has degenerate shape {r.shape}")
        if len(self.assets) != n:
            raise DataError(f"{len(self.assets)} asset labels for {n} columns")
        if len(self.dates) != t:
            raise DataError(f"{len(self.dates)} date labels for {t} rows")
        if not np.all(np.isfinite(r)):
            raise DataError("returns contain non-finite entries")
        r = np.ascontiguousarray(r)
        r.flags.writeable = False
        object.__setattr__(self, "returns", r)

    @property
    def n_periods(self) -> int:
        return self.returns.shape[0]

    @property
    def n_assets(self) -> int:
        return self.returns.shape[1]


def _parse_iso_date(text: str):
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError:
        return None


def load_price_csv(path) -> PriceTable:
    """Load one asset's price history from a CSV file.

    The header must contain ``Date`` and ``Adj Close`` columns (matched
    case-insensitively, extra columns ignored). Rows with unparseable dates
    or missing/non-positive prices are dropped and counted in a warning.
    Rows are returned sorted ascending by date.

    Raises
    ------
    DataError
        If the file is unreadable, has no usable header, yields no valid
        rows, or contains duplicate dates after cleaning.
    """
    path = Path(path)
    asset_id = path.stem
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc

    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except (StopIteration, csv.Error) as exc:
            raise DataError(f"{path}: empty or unreadable CSV") from exc

        columns = {name.strip().lower(): i for i, name in enumerate(header)}
        if DATE_COLUMN not in columns or PRICE_COLUMN not in columns:
            raise DataError(
                f"{path}: header must contain 'Date' and 'Adj Close' columns, got {header}"
            )
        date_idx = columns[DATE_COLUMN]
        price_idx = columns[PRICE_COLUMN]

        rows: list[tuple[dt.date, float]] = []
        dropped = 0
        for record in reader:
            if not record or all(not cell.strip() for cell in record):
                continue
            if len(record) <= max(date_idx, price_idx):
                dropped += 1
                continue
            day = _parse_iso_date(record[date_idx])
            try:
                price = float(record[price_idx])
            except ValueError:
                price = math.nan
            if day is None or not math.isfinite(price) or price <= 0.0:
                dropped += 1
                continue
            rows.append((day, price))

    if dropped:
        logger.warning("%s: dropped %d unusable row(s)", path, dropped)
    if not rows:
        raise DataError(f"{path}: no parseable price rows")

    rows.sort(key=lambda item: item[0])
    for (d0, _), (d1, _) in zip(rows, rows[1:]):
        if d0 == d1:
            raise DataError(f"{path}: duplicate date {d0} after cleaning")

    dates, prices = zip(*rows)
    return PriceTable(asset_id=asset_id, dates=dates, prices=prices)


def load_price_directory(directory) -> list[PriceTable]:
    """Load every ``<TICKER>.csv`` in a directory, sorted by ticker."""
    directory = Path(directory)
    if not directory.is_dir():
        raise DataError(f"data directory not found: {directory}")
    paths = sorted(directory.glob("*.csv"))
    if not paths:
        raise DataError(f"no CSV files in {directory}")
    return [load_price_csv(p) for p in paths]


def align_and_log_returns(tables, date_min=None, date_max=None) -> ReturnSample:
    """Intersect dates across assets and build the log-return matrix.

    Only dates present in *every* table and inside ``[date_min, date_max]``
    are kept; entry (t, j) is ``ln(P[t, j] / P[t-1, j])`` over consecutive
    common dates, so T equals the common-date count minus one. Column order
    follows the input table order.

    Raises
    ------
    DataError
        If no tables are given, an asset has no overlap with the rest, or
        fewer than two common dates remain.
    """
    tables = list(tables)
    if not tables:
        raise DataError("need at least one price table")
    if date_min is not None and date_max is not None and date_max < date_min:
        raise DataError(f"empty date window [{date_min}, {date_max}]")

    def in_window(day):
        if date_min is not None and day < date_min:
            return False
        if date_max is not None and day > date_max:
            return False
        return True

    common = None
    for table in tables:
        days = {d for d in table.dates if in_window(d)}
        common = days if common is None else common & days
        if not common:
            raise DataError(f"asset {table.asset_id}: no overlap with the other assets")

    ordered = sorted(common)
    if len(ordered) < 2:
        raise DataError(f"only {len(ordered)} common date(s); need at least 2")

    n = len(tables)
    prices = np.empty((len(ordered), n))
    for j, table in enumerate(tables):
        lookup = dict(zip(table.dates, table.prices))
        prices[:, j] = [lookup[d] for d in ordered]

    returns = np.log(prices[1:] / prices[:-1])
    return ReturnSample(
        assets=tuple(t.asset_id for t in tables),
        dates=tuple(d.isoformat() for d in ordered[1:]),
        returns=returns,
    )
