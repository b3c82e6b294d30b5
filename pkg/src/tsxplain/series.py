"""Series container, CSV ingestion, monthly resampling, min-max scaling."""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigurationError,
    DegenerateRangeError,
    DimensionError,
    GapError,
    IngestionError,
    InsufficientHistoryError,
)

__all__ = [
    "Series",
    "NormalizationState",
    "as_values",
    "load_csv",
    "resample_monthly",
    "fit_minmax",
    "minmax_normalize",
    "last_window",
]


@dataclass(frozen=True)
class Series:
    """Univariate observations ordered by calendar timestamp.

    Timestamps must be strictly increasing and values finite; both are
    validated on construction. The value buffer is frozen, so instances
    are safe to share across threads.
    """

    timestamps: tuple[dt.date, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        stamps = tuple(self.timestamps)
        values = np.array(self.values, dtype=float)  # copy: caller keeps its buffer
        if values.ndim != 1:
            raise DimensionError("series values must be one-dimensional")
        if len(stamps) != values.shape[0]:
            raise DimensionError(
                f"{len(stamps)} timestamps vs {values.shape[0]} values"
            )
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise IngestionError(f"non-finite value at position {bad}")
        for a, b in zip(stamps, stamps[1:]):
            if b <= a:
                raise IngestionError(
                    f"timestamps not strictly increasing at {b.isoformat()}"
                )
        values.flags.writeable = False
        object.__setattr__(self, "timestamps", stamps)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.timestamps)

    def with_values(self, values: np.ndarray) -> "Series":
        """Same timestamps, new values."""
        return Series(self.timestamps, values)


def as_values(obj) -> np.ndarray:
    """Coerce a Series or array-like to a read-only 1-D float vector."""
    if isinstance(obj, Series):
        return obj.values
    values = np.asarray(obj, dtype=float)
    if values.ndim != 1:
        raise DimensionError("expected a one-dimensional vector")
    return values


@dataclass(frozen=True)
class NormalizationState:
    """Affine min-max map fitted on some reference slice of data.

    Keeps enough to invert exactly, so model-scale values can be shown in
    original units at presentation layers.
    """

    vmin: float
    vmax: float

    def __post_init__(self) -> None:
        if not (self.vmax > self.vmin):
            raise DegenerateRangeError(
                f"max ({self.vmax}) must exceed min ({self.vmin})"
            )

    @property
    def span(self) -> float:
        return self.vmax - self.vmin

    def transform(self, values) -> np.ndarray:
        return (as_values(values) - self.vmin) / self.span

    def invert(self, values) -> np.ndarray:
        return as_values(values) * self.span + self.vmin

    def transform_series(self, s: Series) -> Series:
        return s.with_values(self.transform(s.values))

    def invert_series(self, s: Series) -> Series:
        return s.with_values(self.invert(s.values))

    def invert_value(self, value: float) -> float:
        return float(value) * self.span + self.vmin


def load_csv(path, time_column: str = "date", value_column: str = "value") -> Series:
    """Read a univariate series from a headered CSV file.

    Dates must be ISO-8601 (YYYY-MM-DD), values plain decimals. Rows may
    appear in any order; the result is sorted ascending. Duplicate
    timestamps and unparseable cells are rejected with the offending line
    number (header is line 1).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise IngestionError(f"{path}: empty file, header row required")
        for col in (time_column, value_column):
            if col not in reader.fieldnames:
                raise ConfigurationError(f"{path}: missing column {col!r}")
        rows: list[tuple[dt.date, float]] = []
        for line, row in enumerate(reader, start=2):
            raw_t = row.get(time_column)
            raw_v = row.get(value_column)
            if raw_t is None or raw_v is None:
                raise IngestionError(f"{path}: row {line}: too few cells")
            try:
                stamp = dt.date.fromisoformat(raw_t.strip())
            except ValueError as exc:
                raise IngestionError(
                    f"{path}: row {line}: unparseable date {raw_t!r}"
                ) from exc
            try:
                value = float(raw_v)
            except ValueError as exc:
                raise IngestionError(
                    f"{path}: row {line}: unparseable value {raw_v!r}"
                ) from exc
            if not math.isfinite(value):
                raise IngestionError(f"{path}: row {line}: non-finite value {raw_v!r}")
            rows.append((stamp, value))
    rows.sort(key=lambda r: r[0])
    for (a, _), (b, _) in zip(rows, rows[1:]):
        if a == b:
            raise IngestionError(f"{path}: duplicate timestamp {a.isoformat()}")
    return Series(
        tuple(t for t, _ in rows), np.array([v for _, v in rows], dtype=float)
    )


def _next_month(year: int, month: int) -> tuple[int, int]:
    return (year + 1, 1) if month == 12 else (year, month + 1)


def resample_monthly(s: Series) -> Series:
    """Aggregate to one observation per calendar month.

    Value is the arithmetic mean of the month's observations, stamped on
    the first of the month. A month with no observations inside the series
    range raises rather than interpolating.
    """
    if len(s) == 0:
        return s
    order: list[tuple[int, int]] = []
    acc: dict[tuple[int, int], tuple[float, int]] = {}
    for stamp, value in zip(s.timestamps, s.values):
        key = (stamp.year, stamp.month)
        if key not in acc:
            acc[key] = (0.0, 0)
            order.append(key)
        total, count = acc[key]
        acc[key] = (total + float(value), count + 1)
    prev = order[0]
    for cur in order[1:]:
        expected = _next_month(*prev)
        if cur != expected:
            raise GapError(
                f"no observations for {expected[0]}-{expected[1]:02d}"
            )
        prev = cur
    stamps = tuple(dt.date(y, m, 1) for y, m in order)
    values = np.array([acc[key][0] / acc[key][1] for key in order], dtype=float)
    return Series(stamps, values)


def fit_minmax(values) -> NormalizationState:
    """Fit the min-max map on a reference slice (typically the training split)."""
    arr = as_values(values)
    if arr.size == 0:
        raise DegenerateRangeError("cannot fit scaling on an empty slice")
    return NormalizationState(float(arr.min()), float(arr.max()))


def minmax_normalize(s: Series) -> tuple[Series, NormalizationState]:
    """Scale a series into [0, 1]; the returned state inverts exactly."""
    state = fit_minmax(s.values)
    return state.transform_series(s), state


def last_window(s: Series, q: int) -> Series:
    """The final q observations, in order."""
    if q < 1:
        raise ConfigurationError("window length must be positive")
    if q > len(s):
        raise InsufficientHistoryError(
            f"requested window of {q} from a series of length {len(s)}"
        )
    return Series(s.timestamps[-q:], s.values[-q:])
