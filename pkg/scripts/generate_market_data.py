#!/usr/bin/env python3
"""Regenerate the bundled synthetic market panel (data/synthetic_market).

Ten assets, 200 business days of prices from a correlated geometric random
walk with a single common factor, written in the Yahoo-style CSV layout the
loader expects (extra columns on purpose, to exercise 'ignore the rest').
Fixed seed: rerunning reproduces the committed files byte for byte.
"""

import csv
import datetime as dt
from pathlib import Path

import numpy as np

SEED = 20230102
N_ASSETS = 10
N_DAYS = 200
START = dt.date(2023, 1, 2)
OUT_DIR = Path(__file__).resolve().parent.parent / "data" / "synthetic_market"

TICKERS = ["AXL", "BRV", "CMT", "DRO", "EPH", "FNX", "GLD", "HRK", "IVX", "JUN"]


def business_days(start: dt.date, count: int) -> list[dt.date]:
    days = []
    day = start
    while len(days) < count:
        if day.weekday() < 5:
            days.append(day)
        day += dt.timedelta(days=1)
    return days


def main() -> None:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(SEED)))

    base_prices = rng.uniform(80.0, 1500.0, size=N_ASSETS)
    drifts = rng.uniform(0.0001, 0.0009, size=N_ASSETS)
    vols = rng.uniform(0.008, 0.02, size=N_ASSETS)
    betas = rng.uniform(0.3, 1.1, size=N_ASSETS)

    factor = rng.standard_normal(N_DAYS - 1)
    idio = rng.standard_normal((N_DAYS - 1, N_ASSETS))
    shocks = 0.6 * factor[:, None] * betas + 0.8 * idio
    log_returns = drifts + vols * shocks

    log_prices = np.vstack([np.log(base_prices), np.log(base_prices) + np.cumsum(log_returns, axis=0)])
    prices = np.exp(log_prices)

    dates = business_days(START, N_DAYS)
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for j, ticker in enumerate(TICKERS):
        with open(OUT_DIR / f"{ticker}.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["Date", "Close", "Adj Close", "Volume"])
            for t, day in enumerate(dates):
                px = round(float(prices[t, j]), 2)
                volume = int(rng.integers(50_000, 5_000_000))
                writer.writerow([day.isoformat(), px, px, volume])
    print(f"wrote {N_ASSETS} files x {N_DAYS} rows to {OUT_DIR}")


if __name__ == "__main__":
    main()
