"""
Does distance weighting help the surrogate?
===========================================

Measure how faithfully local surrogates mimic a nonlinear black box over
held-out windows, sweep the bootstrap hyperparameters, and compare the
uniform-weight arm against proximity weighting on identical samples.
"""

import numpy as np

from tsxplain import (
    PerturbationConfig,
    QuadraticSeasonalForecaster,
    distance_ablation,
    feature_family,
    fit_minmax,
    run_grid,
    synthetic_series,
)

# Twenty 12-month windows from the tail of the benchmark series.
series = synthetic_series(n=120, seed=7)
q, n_queries = 12, 20
tail = q + n_queries - 1
scaler = fit_minmax(series.values[: len(series) - tail])
scaled = scaler.transform(series.values)
queries = [scaled[len(series) - tail + i :][:q] for i in range(n_queries)]

black_box = QuadraticSeasonalForecaster()  # AR(2) + quadratic + seasonal term
pcfg = PerturbationConfig(block_length=5, block_swap=2, sample_count=500, rng_seed=0)

# Paired ablation: same bootstrap samples, only the weights differ.
print("family  kernel        MAE      RMSE")
for family in ("lag", "rw", "ew"):
    none_rep, exp_rep = distance_ablation(
        black_box, queries, feature_family(family, q), pcfg, iterations=2
    )
    print(f"{family:>6}  none         {none_rep.mae:.5f}  {none_rep.rmse:.5f}")
    print(f"{family:>6}  exponential  {exp_rep.mae:.5f}  {exp_rep.rmse:.5f}")

# Hyperparameter sweep: 3 block lengths x 3 swaps x 3 feature families.
grid = run_grid(
    black_box,
    queries[:6],
    PerturbationConfig(block_length=5, block_swap=2, sample_count=300, rng_seed=0),
    iterations=2,
    dataset="benchmark",
)
print(f"\n{len(grid.cells)} grid cells; best (block length, swap) per family by RMSE:")
for family in grid.families:
    length, swap = grid.best_cell(family, "rmse")
    cell = grid.cells[(length, swap, family)]
    print(f"  {family}: l={length} s={swap}  rmse={cell['rmse']:.5f}")
