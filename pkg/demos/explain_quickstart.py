"""
Explaining a forecast in five steps
===================================

Fit a black-box forecaster on a synthetic monthly series, then ask the
explainer which parts of the final 12-month window drive its next-month
prediction.
"""

import numpy as np

from tsxplain import (
    KernelConfig,
    PerturbationConfig,
    build_forecaster,
    explain_window,
    fit_minmax,
    parse_feature_specs,
    synthetic_series,
)

# 1. A benchmark series: AR(2) dynamics + yearly seasonality + trend.
series = synthetic_series(n=120, seed=7)

# 2. Scale on the training split only; the last year is held out.
scaler = fit_minmax(series.values[:-12])
scaled = scaler.transform(series.values)
train, window = scaled[:-12], scaled[-12:]

# 3. The black box: an order-3 autoregression (any predict(window) works).
forecaster = build_forecaster("ar:3", train)

# 4. Explain the queried window: bootstrap samples, proximity weights,
#    weighted linear fit over interpretable features.
specs = parse_feature_specs("lag:1,lag:2,lag:3,rw:1:3,ew:5")
pcfg = PerturbationConfig(block_length=5, block_swap=2, sample_count=1000, rng_seed=42)
model, explanation = explain_window(window, forecaster, specs, pcfg, KernelConfig())

# 5. Read the result: signed weights per feature, and how closely the
#    surrogate mimics the black box at the query.
print(f"black box predicts   {explanation.black_box_prediction:.5f}")
print(f"surrogate predicts   {explanation.surrogate_prediction:.5f}")
print()
for label, coef, sign in zip(
    explanation.feature_labels, explanation.coefficients, explanation.signs()
):
    bar = "#" * int(round(40 * abs(coef) / np.abs(explanation.coefficients).max()))
    print(f"  {label:>8}  {sign}  {coef:+.4f}  {bar}")
