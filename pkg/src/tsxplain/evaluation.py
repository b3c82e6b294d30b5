"""Surrogate fidelity metrics, hyperparameter grid, ablation, rank test.

Fidelity compares the black box and its local surrogate on held-out
queried windows: each window gets a freshly fitted surrogate and the
(black box, surrogate) prediction pairs are pooled into MAE / RMSE / MAPE.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .errors import ConfigurationError, ExplainError, MetricError
from .features import FeatureSpec, feature_family
from .perturbation import PerturbationConfig, derive_seed, generate_samples
from .series import as_values
from .surrogate import KernelConfig, explain_window, surrogate_predict

__all__ = [
    "QueryRecord",
    "FidelityReport",
    "GridResult",
    "fidelity",
    "evaluate_fidelity",
    "run_grid",
    "distance_ablation",
    "mann_whitney_u",
]

METRICS = ("mae", "rmse", "mape")

GRID_BLOCK_LENGTHS = (3, 4, 5)
GRID_BLOCK_SWAPS = (2, 3, 4)
GRID_FAMILIES = ("lag", "rw", "ew")


def fidelity(pairs, metric: str) -> float:
    """One scalar metric over (black box, surrogate) prediction pairs.

    mae: mean absolute gap; rmse: root mean squared gap; mape: mean
    absolute gap relative to the black-box value, as a percentage.
    """
    arr = np.asarray(list(pairs), dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] == 0:
        raise ConfigurationError("pairs must be a non-empty list of (f, g) tuples")
    f_vals = arr[:, 0]
    g_vals = arr[:, 1]
    gaps = f_vals - g_vals
    metric = metric.lower()
    if metric == "mae":
        return float(np.mean(np.abs(gaps)))
    if metric == "rmse":
        return float(np.sqrt(np.mean(gaps**2)))
    if metric == "mape":
        if np.any(f_vals == 0):
            raise MetricError("mape undefined: a black-box value is zero")
        return float(np.mean(np.abs(gaps) / np.abs(f_vals)) * 100.0)
    raise ConfigurationError(f"unknown metric {metric!r}")


@dataclass(frozen=True)
class QueryRecord:
    """One (query, iteration) evaluation: black box vs surrogate prediction."""

    query_id: int
    iteration: int
    black_box: float
    surrogate: float
    sample_hash: str


@dataclass(frozen=True)
class FidelityReport:
    """Pooled metrics plus the per-record trail that produced them."""

    mae: float
    rmse: float
    mape: float | None
    records: tuple[QueryRecord, ...]
    iterations: int
    provenance: dict

    def __post_init__(self) -> None:
        # power-mean inequality; a violation means a metric bug
        if self.rmse < self.mae - 1e-12:
            raise MetricError(f"rmse {self.rmse} below mae {self.mae}")

    def metric(self, name: str) -> float:
        value = getattr(self, name.lower())
        if value is None:
            raise MetricError(f"{name} was not computable for this report")
        return value

    def per_iteration(self, metric: str) -> dict[int, float]:
        """Metric recomputed per iteration (used by the grid harness)."""
        out: dict[int, float] = {}
        for it in sorted({r.iteration for r in self.records}):
            pairs = [
                (r.black_box, r.surrogate) for r in self.records if r.iteration == it
            ]
            out[it] = fidelity(pairs, metric)
        return out

    def sample_hashes(self) -> tuple[str, ...]:
        return tuple(r.sample_hash for r in self.records)

    def to_dict(self) -> dict:
        return {
            "mae": self.mae,
            "rmse": self.rmse,
            "mape": self.mape,
            "iterations": self.iterations,
            "records": [
                {
                    "query_id": r.query_id,
                    "iteration": r.iteration,
                    "black_box": r.black_box,
                    "surrogate": r.surrogate,
                    "sample_hash": r.sample_hash,
                }
                for r in self.records
            ],
            "provenance": self.provenance,
        }


def _provenance(specs, pcfg: PerturbationConfig, kcfg: KernelConfig, iterations):
    return {
        "feature_specs": [s.label for s in specs],
        "perturbation": {
            "block_length": pcfg.block_length,
            "block_swap": pcfg.block_swap,
            "sample_count": pcfg.sample_count,
            "ma_window": pcfg.ma_window,
            "rng_seed": pcfg.rng_seed,
        },
        "kernel": {"kind": kcfg.kind, "bandwidth": kcfg.bandwidth},
        "iterations": iterations,
    }


def _run_arms(forecaster, queries, specs, pcfg, kernels, iterations, ridge):
    """Shared engine: one sample set per (query, iteration), one fit per arm.

    Seeds derive from (pcfg.rng_seed, query index, iteration), so a single
    arm run and the matching arm of a paired run see identical samples.
    """
    if iterations < 1:
        raise ConfigurationError("iterations must be >= 1")
    queries = list(queries)
    if not queries:
        raise ConfigurationError("at least one query window is required")
    specs = tuple(specs)
    arm_records: list[list[QueryRecord]] = [[] for _ in kernels]
    for qi, query in enumerate(queries):
        values = as_values(query)
        for it in range(iterations):
            seed = derive_seed(pcfg.rng_seed, qi, it)
            cfg = pcfg.with_seed(seed)
            try:
                samples = generate_samples(values, cfg)
                black_box = float(forecaster.predict(values))
                for arm, kcfg in enumerate(kernels):
                    model, _ = explain_window(
                        values,
                        forecaster,
                        specs,
                        cfg,
                        kcfg,
                        ridge=ridge,
                        samples=samples,
                    )
                    arm_records[arm].append(
                        QueryRecord(
                            query_id=qi,
                            iteration=it,
                            black_box=black_box,
                            surrogate=surrogate_predict(model, values),
                            sample_hash=samples.content_hash(),
                        )
                    )
            except ExplainError as exc:
                raise type(exc)(f"query {qi}, iteration {it}: {exc}") from exc

    reports = []
    for kcfg, records in zip(kernels, arm_records):
        pairs = [(r.black_box, r.surrogate) for r in records]
        try:
            mape = fidelity(pairs, "mape")
        except MetricError:
            mape = None
        reports.append(
            FidelityReport(
                mae=fidelity(pairs, "mae"),
                rmse=fidelity(pairs, "rmse"),
                mape=mape,
                records=tuple(records),
                iterations=iterations,
                provenance=_provenance(specs, pcfg, kcfg, iterations),
            )
        )
    return reports


def evaluate_fidelity(
    forecaster,
    queries,
    specs,
    pcfg: PerturbationConfig,
    kcfg: KernelConfig | None = None,
    iterations: int = 5,
    ridge: float = 1e-8,
) -> FidelityReport:
    """Fidelity of per-query local surrogates over a set of queried windows.

    Every (query, iteration) pair trains a fresh surrogate on its own seed
    stream; metrics pool all resulting prediction pairs. Deterministic for
    a fixed pcfg.rng_seed.
    """
    kcfg = kcfg if kcfg is not None else KernelConfig()
    return _run_arms(forecaster, queries, specs, pcfg, [kcfg], iterations, ridge)[0]


def distance_ablation(
    forecaster,
    queries,
    specs,
    pcfg: PerturbationConfig,
    iterations: int = 5,
    bandwidth: float | None = None,
    ridge: float = 1e-8,
) -> tuple[FidelityReport, FidelityReport]:
    """Paired uniform-vs-proximity-weighting comparison.

    Both arms share the exact same bootstrap samples per (query,
    iteration); only the training weights differ. Returns (without
    distance, with distance).
    """
    kernels = [
        KernelConfig(kind="none"),
        KernelConfig(kind="exponential", bandwidth=bandwidth),
    ]
    none_report, exp_report = _run_arms(
        forecaster, queries, specs, pcfg, kernels, iterations, ridge
    )
    return none_report, exp_report


@dataclass(frozen=True)
class GridResult:
    """Mean per-iteration metrics for every (block length, swap, family) cell."""

    cells: dict[tuple[int, int, str], dict[str, float]]
    dataset: str
    block_lengths: tuple[int, ...]
    block_swaps: tuple[int, ...]
    families: tuple[str, ...]
    provenance: dict = field(default_factory=dict)

    def best_cell(self, family: str, metric: str) -> tuple[int, int]:
        """argmin cell for a family; ties prefer smaller swap, then length."""
        candidates = []
        for l in self.block_lengths:
            for s in self.block_swaps:
                value = self.cells[(l, s, family)][metric]
                if value is None:
                    value = math.inf
                candidates.append((value, s, l))
        _, swap, length = min(candidates)
        return length, swap

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            ["dataset", "block_length", "block_swap", "family", "MAE", "RMSE", "MAPE"]
        )
        for l in self.block_lengths:
            for s in self.block_swaps:
                for family in self.families:
                    cell = self.cells[(l, s, family)]
                    writer.writerow(
                        [
                            self.dataset,
                            l,
                            s,
                            family,
                            repr(cell["mae"]),
                            repr(cell["rmse"]),
                            "" if cell["mape"] is None else repr(cell["mape"]),
                        ]
                    )
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {
            "dataset": self.dataset,
            "provenance": self.provenance,
            "cells": [
                {
                    "block_length": l,
                    "block_swap": s,
                    "family": family,
                    **self.cells[(l, s, family)],
                }
                for l in self.block_lengths
                for s in self.block_swaps
                for family in self.families
            ],
            "best": {
                family: {
                    metric: self.best_cell(family, metric)
                    for metric in METRICS
                }
                for family in self.families
            },
        }
        return json.dumps(payload, indent=2, sort_keys=True)


def run_grid(
    forecaster,
    queries,
    pcfg_template: PerturbationConfig,
    kcfg: KernelConfig | None = None,
    block_lengths=GRID_BLOCK_LENGTHS,
    block_swaps=GRID_BLOCK_SWAPS,
    families=GRID_FAMILIES,
    iterations: int = 5,
    dataset: str = "dataset",
) -> GridResult:
    """Sweep bootstrap hyperparameters per feature family.

    Each cell averages the per-iteration metrics from evaluate_fidelity.
    Cell means use the kernel handed in (proximity weighting by default).
    """
    queries = list(queries)
    if not queries:
        raise ConfigurationError("at least one query window is required")
    q = as_values(queries[0]).size
    for query in queries[1:]:
        if as_values(query).size != q:
            raise ConfigurationError("all query windows must share one length")
    kcfg = kcfg if kcfg is not None else KernelConfig()

    cells: dict[tuple[int, int, str], dict[str, float]] = {}
    for l in block_lengths:
        for s in block_swaps:
            cfg = PerturbationConfig(
                block_length=l,
                block_swap=s,
                sample_count=pcfg_template.sample_count,
                ma_window=pcfg_template.ma_window,
                rng_seed=pcfg_template.rng_seed,
            )
            for family in families:
                specs = feature_family(family, q)
                report = evaluate_fidelity(
                    forecaster, queries, specs, cfg, kcfg, iterations=iterations
                )
                cell: dict[str, float | None] = {}
                for metric in METRICS:
                    try:
                        per_it = report.per_iteration(metric)
                        cell[metric] = float(np.mean(list(per_it.values())))
                    except MetricError:
                        cell[metric] = None
                cells[(l, s, family)] = cell
    return GridResult(
        cells=cells,
        dataset=dataset,
        block_lengths=tuple(block_lengths),
        block_swaps=tuple(block_swaps),
        families=tuple(families),
        provenance={
            "sample_count": pcfg_template.sample_count,
            "ma_window": pcfg_template.ma_window,
            "rng_seed": pcfg_template.rng_seed,
            "kernel": {"kind": kcfg.kind, "bandwidth": kcfg.bandwidth},
            "iterations": iterations,
            "query_count": len(queries),
            "window_length": q,
        },
    )


def mann_whitney_u(scores_a, scores_b) -> tuple[float, float]:
    """Rank-sum U statistic for sample a, with a two-sided asymptotic p.

    Ties share midranks; the normal approximation uses the tie-corrected
    variance and a 0.5 continuity correction. U counts pairs where a
    exceeds b, plus half of the tied pairs, so U_a + U_b = n1 * n2.
    """
    a = as_values(scores_a)
    b = as_values(scores_b)
    if a.size == 0 or b.size == 0:
        raise ConfigurationError("both samples must be non-empty")
    n1, n2 = a.size, b.size
    combined = np.concatenate([a, b])
    if np.all(combined == combined[0]):
        raise MetricError("all values identical: rank variance is zero")
    ranks = rankdata(combined)
    r1 = float(ranks[:n1].sum())
    u_a = r1 - n1 * (n1 + 1) / 2.0

    n = n1 + n2
    _, counts = np.unique(combined, return_counts=True)
    tie_term = float(np.sum(counts.astype(float) ** 3 - counts))
    variance = (n1 * n2 / 12.0) * ((n + 1) - tie_term / (n * (n - 1)))
    if variance <= 0:
        raise MetricError("rank variance is zero")
    mean_u = n1 * n2 / 2.0
    z = (abs(u_a - mean_u) - 0.5) / math.sqrt(variance)
    z = max(z, 0.0)  # continuity correction cannot push past the mean
    p = math.erfc(z / math.sqrt(2.0))
    return float(u_a), min(1.0, float(p))
