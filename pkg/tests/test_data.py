import datetime as dt
import logging
import math

import numpy as np
import pytest

from risklab.data import (
    PriceTable,
    ReturnSample,
    align_and_log_returns,
    load_price_csv,
    load_price_directory,
)
from risklab.exceptions import DataError


def table(asset, pairs):
    dates, prices = zip(*pairs)
    return PriceTable(asset_id=asset,
                      dates=tuple(dt.date.fromisoformat(d) for d in dates),
                      prices=tuple(float(p) for p in prices))


class TestLoadPriceCsv:
    def test_loads_three_rows(self, write_price_csv):
        path = write_price_csv("AAA", [
            ["2024-01-01", "100"], ["2024-01-02", "110"], ["2024-01-03", "121"],
        ])
        result = load_price_csv(path)
        assert result.asset_id == "AAA"
        assert len(result) == 3
        assert result.prices == (100.0, 110.0, 121.0)

    def test_drops_nonpositive_price_with_warning(self, write_price_csv, caplog):
        path = write_price_csv("AAA", [
            ["2024-01-01", "100"], ["2024-01-02", "0"], ["2024-01-03", "121"],
        ])
        with caplog.at_level(logging.WARNING):
            result = load_price_csv(path)
        assert len(result) == 2
        assert any("dropped 1" in rec.message for rec in caplog.records)

    def test_sorts_shuffled_dates(self, write_price_csv):
        path = write_price_csv("AAA", [
            ["2024-01-03", "121"], ["2024-01-01", "100"], ["2024-01-02", "110"],
        ])
        result = load_price_csv(path)
        assert [d.day for d in result.dates] == [1, 2, 3]
        assert result.prices == (100.0, 110.0, 121.0)

    def test_header_case_insensitive_extra_columns_ignored(self, write_price_csv):
        path = write_price_csv("AAA", [
            ["2024-01-01", "x", "100", "5"], ["2024-01-02", "y", "110", "6"],
        ], header=("DATE", "Open", "adj CLOSE", "Volume"))
        result = load_price_csv(path)
        assert result.prices == (100.0, 110.0)

    def test_rejects_missing_columns(self, write_price_csv):
        path = write_price_csv("AAA", [["2024-01-01", "1"]], header=("Date", "Close"))
        with pytest.raises(DataError, match="Adj Close"):
            load_price_csv(path)

    def test_rejects_no_parseable_rows(self, write_price_csv):
        path = write_price_csv("AAA", [["not-a-date", "abc"]])
        with pytest.raises(DataError, match="no parseable"):
            load_price_csv(path)

    def test_rejects_duplicate_dates(self, write_price_csv):
        path = write_price_csv("AAA", [["2024-01-01", "100"], ["2024-01-01", "110"]])
        with pytest.raises(DataError, match="duplicate"):
            load_price_csv(path)

    def test_rejects_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="cannot read"):
            load_price_csv(tmp_path / "nope.csv")

    def test_directory_loader_sorted_by_ticker(self, toy_data_dir):
        tables = load_price_directory(toy_data_dir)
        assert [t.asset_id for t in tables] == ["AAA", "BBB", "CCC"]
        with pytest.raises(DataError, match="not found"):
            load_price_directory(toy_data_dir / "missing")


class TestAlignAndLogReturns:
    def test_two_assets_single_period(self):
        tables = [
            table("A", [("2024-01-01", 100), ("2024-01-02", 110)]),
            table("B", [("2024-01-01", 100), ("2024-01-02", 110)]),
        ]
        sample = align_and_log_returns(tables)
        assert sample.returns.shape == (1, 2)
        np.testing.assert_allclose(sample.returns, math.log(1.1), rtol=1e-15)

    def test_single_asset_value(self):
        sample = align_and_log_returns([table("A", [("2024-01-01", 100), ("2024-01-02", 121)])])
        assert sample.returns[0, 0] == pytest.approx(0.19062, abs=5e-6)

    def test_intersection_semantics(self):
        tables = [
            table("A", [("2024-01-01", 100), ("2024-01-02", 110), ("2024-01-03", 120)]),
            table("B", [("2024-01-02", 50), ("2024-01-03", 55)]),
        ]
        sample = align_and_log_returns(tables)
        assert sample.n_periods == 1
        assert sample.dates == ("2024-01-03",)

    def test_row_count_is_common_dates_minus_one(self, toy_data_dir):
        tables = load_price_directory(toy_data_dir)
        sample = align_and_log_returns(tables)
        assert sample.n_periods == len(tables[0]) - 1

    def test_cumulative_log_return_identity(self, market_sample):
        # exp(sum of log returns) must reproduce last/first aligned price
        from risklab.data import load_price_directory
        from tests.conftest import MARKET_DATA_DIR

        tables = load_price_directory(MARKET_DATA_DIR)
        for j, tab in enumerate(tables):
            ratio = tab.prices[-1] / tab.prices[0]
            rebuilt = math.exp(market_sample.returns[:, j].sum())
            assert rebuilt == pytest.approx(ratio, rel=1e-12)

    def test_permutation_invariance(self, toy_data_dir):
        tables = load_price_directory(toy_data_dir)
        base = align_and_log_returns(tables)
        permuted = align_and_log_returns([tables[2], tables[0], tables[1]])
        assert permuted.assets == (base.assets[2], base.assets[0], base.assets[1])
        np.testing.assert_array_equal(permuted.returns[:, 1], base.returns[:, 0])
        np.testing.assert_array_equal(permuted.returns[:, 0], base.returns[:, 2])

    def test_date_window(self):
        t = table("A", [("2024-01-01", 100), ("2024-01-02", 110),
                        ("2024-01-03", 120), ("2024-01-04", 130)])
        sample = align_and_log_returns([t], date_min=dt.date(2024, 1, 2),
                                       date_max=dt.date(2024, 1, 3))
        assert sample.n_periods == 1
        assert sample.dates == ("2024-01-03",)

    def test_errors(self):
        with pytest.raises(DataError, match="at least one"):
            align_and_log_returns([])
        t = table("A", [("2024-01-01", 100), ("2024-01-02", 110)])
        with pytest.raises(DataError, match="common date"):
            align_and_log_returns([t], date_min=dt.date(2024, 1, 2))
        other = table("B", [("2023-06-01", 10), ("2023-06-02", 11)])
        with pytest.raises(DataError, match="no overlap"):
            align_and_log_returns([t, other])


class TestReturnSample:
    def test_matrix_is_read_only(self, market_sample):
        assert not market_sample.returns.flags.writeable
        with pytest.raises(ValueError):
            market_sample.returns[0, 0] = 1.0

    def test_rejects_non_finite(self):
        with pytest.raises(DataError, match="non-finite"):
            ReturnSample(assets=("A",), dates=("d1",),
                         returns=np.array([[np.nan]]))

    def test_rejects_label_mismatch(self):
        with pytest.raises(DataError):
            ReturnSample(assets=("A", "B"), dates=("d1",),
                         returns=np.zeros((1, 1)))


class TestPriceTable:
    def test_rejects_nonincreasing_dates(self):
        with pytest.raises(DataError, match="strictly increasing"):
            table("A", [("2024-01-02", 100), ("2024-01-01", 110)])

    def test_rejects_bad_price(self):
        with pytest.raises(DataError, match="non-positive"):
            table("A", [("2024-01-01", -5)])
