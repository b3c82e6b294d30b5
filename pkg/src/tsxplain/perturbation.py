"""Moving block bootstrap perturbation around a queried window.

A queried window is split into a centered moving average and a residual
component, contiguous residual blocks are exchanged pairwise, and the
moving average is added back. Swapping only residual blocks keeps each
sample close to the original trend while reshuffling local variation.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError
from .series import as_values

__all__ = [
    "PerturbationConfig",
    "Decomposition",
    "SampleSet",
    "derive_seed",
    "decompose",
    "enumerate_blocks",
    "mbb_sample",
    "generate_samples",
]

_UINT64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def derive_seed(master: int, *key: int) -> int:
    """Deterministic child seed for a (master seed, integer key path) pair."""
    seq = np.random.SeedSequence(entropy=master & int(_UINT64), spawn_key=tuple(key))
    lo, hi = seq.generate_state(2)
    return int(lo) | (int(hi) << 32)


@dataclass(frozen=True)
class PerturbationConfig:
    """Bootstrap parameters.

    block_length is the width of each exchanged residual segment,
    block_swap the number of pairwise exchange rounds per sample, and
    sample_count the number of samples to draw. ma_window is the width of
    the centered moving average used for the trend split.
    """

    block_length: int
    block_swap: int
    sample_count: int
    ma_window: int = 3
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.block_length < 1:
            raise ConfigurationError("block_length must be positive")
        if self.block_swap < 0:
            raise ConfigurationError("block_swap must be non-negative")
        if self.sample_count < 1:
            raise ConfigurationError("sample_count must be positive")
        if self.ma_window < 1 or self.ma_window % 2 == 0:
            raise ConfigurationError("ma_window must be a positive odd count")

    def validate_for(self, q: int) -> None:
        """Check the window-dependent invariants for a window of length q."""
        if self.block_length > q:
            raise ConfigurationError(
                f"block_length {self.block_length} exceeds window length {q}"
            )
        if self.block_swap > 0:
            if q - self.block_length + 1 < 2:
                raise ConfigurationError(
                    "swapping needs at least two candidate blocks "
                    f"(q={q}, block_length={self.block_length})"
                )
            if 2 * self.block_length > q:
                raise ConfigurationError(
                    "no non-overlapping block pair exists "
                    f"(q={q}, block_length={self.block_length})"
                )

    def with_seed(self, seed: int) -> "PerturbationConfig":
        return replace(self, rng_seed=seed)


@dataclass(frozen=True)
class Decomposition:
    """Additive split of a window into moving average and residual."""

    moving_average: np.ndarray
    residual: np.ndarray


@dataclass(frozen=True)
class SampleSet:
    """Bootstrap samples stacked row-wise, plus the config that made them."""

    samples: np.ndarray  # shape (p, q)
    config: PerturbationConfig

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 2:
            raise ConfigurationError("samples must be a (p, q) matrix")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    @property
    def count(self) -> int:
        return self.samples.shape[0]

    @property
    def window_length(self) -> int:
        return self.samples.shape[1]

    def content_hash(self) -> str:
        """Stable digest of the sample values; used to verify paired designs."""
        return hashlib.sha256(np.ascontiguousarray(self.samples).tobytes()).hexdigest()

    def to_csv(self, path) -> None:
        """One sample per line, comma-separated, for offline inspection."""
        with open(path, "w", encoding="utf-8") as fh:
            for row in self.samples:
                fh.write(",".join(repr(v) for v in row.tolist()) + "\n")


def decompose(window, m: int = 3) -> Decomposition:
    """Split a window into a centered moving average and residuals.

    The averaging window has nominal width m (odd) and is clipped at the
    edges, so both components keep the window's length and sum back to it.
    """
    values = as_values(window)
    if values.size < 1:
        raise ConfigurationError("window must not be empty")
    if m < 1 or m % 2 == 0:
        raise ConfigurationError("ma window must be a positive odd count")
    half = (m - 1) // 2
    n = values.size
    trend = np.empty(n, dtype=float)
    for i in range(n):
        lo = max(0, i - half)
        hi = min(n, i + half + 1)
        trend[i] = values[lo:hi].mean()
    return Decomposition(moving_average=trend, residual=values - trend)


def enumerate_blocks(residual, block_length: int) -> list[int]:
    """1-based start indices of every contiguous residual block.

    A residual vector of length q with block length l yields q - l + 1
    blocks, block i covering positions [i, i + l - 1].
    """
    values = as_values(residual)
    q = values.size
    if block_length < 1 or block_length > q:
        raise ConfigurationError(
            f"block_length {block_length} invalid for residual of length {q}"
        )
    return list(range(1, q - block_length + 2))


def _rng_for_draw(cfg: PerturbationConfig, draw_index: int) -> np.random.Generator:
    seq = np.random.SeedSequence(
        entropy=cfg.rng_seed & int(_UINT64), spawn_key=(draw_index,)
    )
    return np.random.default_rng(seq)


def mbb_sample(window, cfg: PerturbationConfig, draw_index: int) -> np.ndarray:
    """Draw one bootstrap sample, reproducible from (rng_seed, draw_index).

    Each of the cfg.block_swap rounds picks, uniformly, an unordered pair
    of non-overlapping block starts (rejection sampling) and exchanges the
    two residual segments. Non-overlap makes the swap an exact permutation
    of the residual values.
    """
    values = as_values(window)
    q = values.size
    cfg.validate_for(q)
    if cfg.block_swap == 0:
        return values.copy()
    parts = decompose(values, cfg.ma_window)
    residual = parts.residual.copy()
    l = cfg.block_length
    n_starts = q - l + 1
    if n_starts < 2 or 2 * l > q:  # unreachable given validate_for; kept as a guard
        raise ConfigurationError("no valid non-overlapping block pair exists")
    rng = _rng_for_draw(cfg, draw_index)
    for _ in range(cfg.block_swap):
        while True:
            i, j = rng.integers(0, n_starts, size=2)
            if abs(int(i) - int(j)) >= l:
                break
        i, j = int(i), int(j)
        block_i = residual[i : i + l].copy()
        residual[i : i + l] = residual[j : j + l]
        residual[j : j + l] = block_i
    return parts.moving_average + residual


def generate_samples(window, cfg: PerturbationConfig) -> SampleSet:
    """Draw cfg.sample_count bootstrap samples around the window.

    Sample i comes from mbb_sample with draw_index i, so any sample can
    be regenerated independently of the others.
    """
    values = as_values(window)
    cfg.validate_for(values.size)
    samples = np.stack(
        [mbb_sample(values, cfg, i) for i in range(cfg.sample_count)]
    )
    return SampleSet(samples=samples, config=cfg)
