import datetime as dt

import numpy as np
import pytest

from tsxplain.errors import (
    ConfigurationError,
    DegenerateRangeError,
    GapError,
    IngestionError,
    InsufficientHistoryError,
)
from tsxplain.series import (
    Series,
    fit_minmax,
    last_window,
    load_csv,
    minmax_normalize,
    resample_monthly,
)


def monthly(values, start_year=2020, start_month=1):
    stamps = []
    y, m = start_year, start_month
    for _ in values:
        stamps.append(dt.date(y, m, 1))
        m += 1
        if m > 12:
            m, y = 1, y + 1
    return Series(tuple(stamps), np.asarray(values, dtype=float))


TOY = monthly([10, 20, 30, 40, 50, 60])


class TestSeriesInvariants:
    def test_lengths_must_match(self):
        with pytest.raises(Exception):
            Series((dt.date(2020, 1, 1),), np.array([1.0, 2.0]))

    def test_non_finite_rejected(self):
        stamps = (dt.date(2020, 1, 1), dt.date(2020, 2, 1))
        with pytest.raises(IngestionError):
            Series(stamps, np.array([1.0, np.nan]))
        with pytest.raises(IngestionError):
            Series(stamps, np.array([1.0, np.inf]))

    def test_strictly_increasing_timestamps(self):
        stamps = (dt.date(2020, 2, 1), dt.date(2020, 1, 1))
        with pytest.raises(IngestionError):
            Series(stamps, np.array([1.0, 2.0]))
        with pytest.raises(IngestionError):
            Series((dt.date(2020, 1, 1),) * 2, np.array([1.0, 2.0]))

    def test_values_frozen(self):
        with pytest.raises(ValueError):
            TOY.values[0] = 99.0


class TestLoadCsv:
    def test_identity_ingestion(self, tmp_path):
        path = tmp_path / "toy.csv"
        rows = ["date,value"]
        for stamp, value in zip(TOY.timestamps, TOY.values):
            rows.append(f"{stamp.isoformat()},{value}")
        path.write_text("\n".join(rows) + "\n")
        series = load_csv(path)
        assert len(series) == 6
        np.testing.assert_allclose(series.values, TOY.values)

    def test_shuffled_rows_sorted(self, tmp_path):
        path = tmp_path / "shuffled.csv"
        path.write_text(
            "date,value\n2020-03-01,3\n2020-01-01,1\n2020-02-01,2\n"
        )
        series = load_csv(path)
        np.testing.assert_allclose(series.values, [1.0, 2.0, 3.0])
        assert series.timestamps[0] == dt.date(2020, 1, 1)

    def test_bad_value_cites_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("date,value\n2020-01-01,1\n2020-02-01,oops\n")
        with pytest.raises(IngestionError, match="row 3"):
            load_csv(path)

    def test_bad_date_cites_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("date,value\n01/02/2020,1\n")
        with pytest.raises(IngestionError, match="row 2"):
            load_csv(path)

    def test_missing_column_is_configuration_error(self, tmp_path):
        path = tmp_path / "cols.csv"
        path.write_text("when,value\n2020-01-01,1\n")
        with pytest.raises(ConfigurationError, match="date"):
            load_csv(path)

    def test_duplicate_timestamp_rejected(self, tmp_path):
        path = tmp_path / "dup.csv"
        path.write_text("date,value\n2020-01-01,1\n2020-01-01,2\n")
        with pytest.raises(IngestionError, match="duplicate"):
            load_csv(path)

    def test_nan_literal_rejected(self, tmp_path):
        path = tmp_path / "nan.csv"
        path.write_text("date,value\n2020-01-01,nan\n")
        with pytest.raises(IngestionError, match="row 2"):
            load_csv(path)


class TestResampleMonthly:
    def test_mean_of_two_days(self):
        series = Series(
            (dt.date(2020, 1, 3), dt.date(2020, 1, 20)), np.array([2.0, 4.0])
        )
        out = resample_monthly(series)
        assert len(out) == 1
        assert out.timestamps[0] == dt.date(2020, 1, 1)
        assert out.values[0] == pytest.approx(3.0)

    def test_idempotent_on_monthly(self):
        out = resample_monthly(TOY)
        assert out.timestamps == TOY.timestamps
        np.testing.assert_array_equal(out.values, TOY.values)

    def test_constant_month(self):
        stamps = tuple(dt.date(2020, 1, d) for d in range(1, 32))
        series = Series(stamps, np.full(31, 7.0))
        out = resample_monthly(series)
        assert len(out) == 1
        assert out.values[0] == pytest.approx(7.0)

    def test_gap_month_fails_loudly(self):
        series = Series(
            (dt.date(2020, 1, 5), dt.date(2020, 3, 5)), np.array([1.0, 2.0])
        )
        with pytest.raises(GapError, match="2020-02"):
            resample_monthly(series)

    def test_year_boundary(self):
        series = Series(
            (dt.date(2020, 12, 10), dt.date(2021, 1, 10)), np.array([1.0, 2.0])
        )
        out = resample_monthly(series)
        assert out.timestamps == (dt.date(2020, 12, 1), dt.date(2021, 1, 1))


class TestNormalization:
    def test_toy_scaling(self):
        scaled, state = minmax_normalize(TOY)
        np.testing.assert_allclose(scaled.values, [0.0, 0.2, 0.4, 0.6, 0.8, 1.0])
        assert state.vmin == 10.0 and state.vmax == 60.0

    def test_round_trip_within_tolerance(self):
        rng = np.random.default_rng(5)
        series = monthly(rng.normal(100.0, 25.0, size=48))
        scaled, state = minmax_normalize(series)
        back = state.invert_series(scaled)
        np.testing.assert_allclose(back.values, series.values, atol=1e-12)

    def test_constant_series_rejected(self):
        series = monthly([5.0, 5.0, 5.0])
        with pytest.raises(DegenerateRangeError):
            minmax_normalize(series)

    def test_fit_on_training_slice_only(self):
        state = fit_minmax(TOY.values[:4])
        assert state.vmax == 40.0
        scaled = state.transform(TOY.values)
        assert scaled[-1] > 1.0  # held-out values may leave [0, 1]


class TestLastWindow:
    def test_whole_series(self):
        out = last_window(TOY, 6)
        assert out.timestamps == TOY.timestamps
        np.testing.assert_array_equal(out.values, TOY.values)

    def test_tail(self):
        out = last_window(TOY, 3)
        np.testing.assert_allclose(out.values, [40.0, 50.0, 60.0])

    def test_too_long_window(self):
        with pytest.raises(InsufficientHistoryError):
            last_window(TOY, 7)

    def test_non_positive_window(self):
        with pytest.raises(ConfigurationError):
            last_window(TOY, 0)
