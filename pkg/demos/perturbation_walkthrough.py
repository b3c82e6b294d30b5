"""
Inside the moving block bootstrap
=================================

How a queried window becomes a cloud of nearby samples: trend/residual
split, block exchange, reconstruction. Swapping residual blocks keeps
every sample on the window's trend while reshuffling local variation.
"""

import numpy as np

from tsxplain import PerturbationConfig, decompose, enumerate_blocks, generate_samples

rng = np.random.default_rng(3)
window = np.round(0.5 + 0.3 * np.sin(np.arange(12) / 2) + rng.normal(0, 0.05, 12), 3)
print("window   ", window)

# Split into a centered moving average (the trend) and residuals.
parts = decompose(window, m=3)
print("trend    ", np.round(parts.moving_average, 3))
print("residual ", np.round(parts.residual, 3))

# Contiguous residual blocks of length 5: q - l + 1 = 8 starting points.
print("block starts:", enumerate_blocks(parts.residual, 5))

# Each sample swaps two non-overlapping blocks, twice, then adds the
# trend back. Every sample keeps the residual values as a multiset.
cfg = PerturbationConfig(block_length=5, block_swap=2, sample_count=1000, rng_seed=42)
samples = generate_samples(window, cfg)
print("\nfirst three samples:")
for row in samples.samples[:3]:
    print("  ", np.round(row, 3))

distances = np.sqrt(np.sum((samples.samples - window) ** 2, axis=1))
print(f"\ndistance to the window: min {distances.min():.3f}, "
      f"median {np.median(distances):.3f}, max {distances.max():.3f}")
print("samples untouched by swaps:", int(np.sum(distances == 0)))

# More swap rounds push samples further out, on average.
for s in range(4):
    cfg_s = PerturbationConfig(block_length=3, block_swap=s, sample_count=500, rng_seed=1)
    d = np.sqrt(np.sum((generate_samples(window, cfg_s).samples - window) ** 2, axis=1))
    print(f"block_swap={s}: mean distance {d.mean():.3f}")
