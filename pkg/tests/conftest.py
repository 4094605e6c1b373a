import csv
from pathlib import Path

import numpy as np
import pytest

from risklab.data import align_and_log_returns, load_price_directory

REPO_ROOT = Path(__file__).resolve().parent.parent
MARKET_DATA_DIR = REPO_ROOT / "data" / "synthetic_market"


@pytest.fixture(scope="session")
def market_sample():
    """The bundled 10-asset synthetic market panel (199 return rows)."""
    tables = load_price_directory(MARKET_DATA_DIR)
    return align_and_log_returns(tables)


@pytest.fixture
def write_price_csv(tmp_path):
    """Factory writing a minimal price CSV; returns the file path."""

    def _write(name, rows, header=("Date", "Adj Close")):
        path = tmp_path / f"{name}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        return path

    return _write


@pytest.fixture
def toy_data_dir(tmp_path):
    """Directory of three clean price CSVs over 40 common business days."""
    rng = np.random.default_rng(42)
    data_dir = tmp_path / "toydata"
    data_dir.mkdir()
    dates = [f"2024-01-{d:02d}" for d in range(1, 29)] + [f"2024-02-{d:02d}" for d in range(1, 13)]
    for ticker, start in (("AAA", 100.0), ("BBB", 250.0), ("CCC", 40.0)):
        price = start
        with open(data_dir / f"{ticker}.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["Date", "Adj Close"])
            for day in dates:
                writer.writerow([day, f"{price:.4f}"])
                price *= float(np.exp(rng.normal(0.0004, 0.01)))
    return data_dir
