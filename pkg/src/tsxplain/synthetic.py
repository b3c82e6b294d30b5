"""Synthetic monthly benchmark series and a nonlinear reference black box.

The series mixes a second-order autoregression, a 12-month seasonal cycle
and a mild trend; the reference forecaster adds a quadratic term on top of
the same ingredients so that no linear surrogate can match it globally.
Both are used by the evaluation harness and its tests.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np

from .series import Series, as_values

__all__ = ["synthetic_series", "QuadraticSeasonalForecaster"]


def synthetic_series(
    n: int = 120, seed: int = 7, start: dt.date = dt.date(2014, 1, 1)
) -> Series:
    """Monthly series driven by AR(2) dynamics plus seasonality and trend."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    noise = rng.normal(0.0, 0.6, size=n)
    x = np.zeros(n)
    for t in range(n):
        prev1 = x[t - 1] if t >= 1 else 0.0
        prev2 = x[t - 2] if t >= 2 else 0.0
        x[t] = 0.55 * prev1 - 0.2 * prev2 + noise[t]
    months = np.arange(n)
    seasonal = 2.4 * np.sin(2.0 * np.pi * months / 12.0)
    trend = 0.035 * months
    values = 10.0 + trend + seasonal + x

    stamps = []
    year, month = start.year, start.month
    for _ in range(n):
        stamps.append(dt.date(year, month, 1))
        month += 1
        if month > 12:
            month = 1
            year += 1
    return Series(tuple(stamps), values)


@dataclass(frozen=True)
class QuadraticSeasonalForecaster:
    """Nonlinear one-step forecaster: AR(2) plus a quadratic and a seasonal term.

    Operates on normalized windows (values roughly in [0, 1]); the
    quadratic coefficient is large enough that a single global linear fit
    over a bootstrap cloud is visibly worse than a proximity-weighted one.
    """

    ar1: float = 0.4
    ar2: float = 0.2
    quad: float = 2.5
    seasonal: float = 0.3
    season_length: int = 12
    intercept: float = 0.05

    def predict(self, window) -> float:
        w = as_values(window)
        if w.size < 2:
            raise ValueError("window must hold at least two values")
        newest = float(w[-1])
        second = float(w[-2])
        if w.size >= self.season_length:
            season = float(w[-self.season_length])
        else:
            season = float(w.mean())
        return (
            self.intercept
            + self.ar1 * newest
            + self.ar2 * second
            + self.quad * newest * newest
            + self.seasonal * season
        )
