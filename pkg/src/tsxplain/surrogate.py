"""Distance-weighted linear surrogate fitting and the explanation pipeline.

The pipeline around a queried window: draw bootstrap samples, score each
with the black-box forecaster, evaluate the interpretable features at the
forecast time, weight samples by proximity to the query, and fit a ridge-
stabilised weighted least squares model. The fitted coefficients are the
explanation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import ConfigurationError, DimensionError, SingularSystemError
from .features import FeatureMatrix, FeatureSpec, build_feature_matrix, feature_row
from .perturbation import PerturbationConfig, SampleSet, generate_samples
from .series import as_values

__all__ = [
    "KernelConfig",
    "SurrogateModel",
    "Explanation",
    "euclidean_distance",
    "distance_vector",
    "kernel_weights",
    "fit_wls",
    "explain_window",
    "surrogate_predict",
    "sign_rule_text",
]

DEFAULT_RIDGE = 1e-8


def euclidean_distance(window, sample) -> float:
    """Plain Euclidean distance between two equal-length vectors."""
    a = as_values(window)
    b = as_values(sample)
    if a.shape != b.shape:
        raise DimensionError(f"length mismatch: {a.size} vs {b.size}")
    return float(np.sqrt(np.sum((a - b) ** 2)))


def distance_vector(window, samples) -> np.ndarray:
    """Distances from the queried window to every sample row."""
    w = as_values(window)
    rows = samples.samples if isinstance(samples, SampleSet) else np.asarray(
        samples, dtype=float
    )
    if rows.ndim != 2 or rows.shape[1] != w.size:
        raise DimensionError("samples must be (p, q) with q matching the window")
    return np.sqrt(np.sum((rows - w) ** 2, axis=1))


@dataclass(frozen=True)
class KernelConfig:
    """Proximity weighting scheme.

    kind "none" gives uniform weights (the no-distance ablation arm);
    "exponential" gives exp(-d^2 / sigma^2) with sigma either fixed or,
    when bandwidth is None, the median of the positive distances.
    """

    kind: Literal["exponential", "none"] = "exponential"
    bandwidth: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("exponential", "none"):
            raise ConfigurationError(f"unknown kernel kind {self.kind!r}")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ConfigurationError("bandwidth must be positive")


def kernel_weights(distances, cfg: KernelConfig) -> np.ndarray:
    """Map distances to positive training weights."""
    d = as_values(distances)
    if cfg.kind == "none":
        return np.ones_like(d)
    if cfg.bandwidth is not None:
        sigma = cfg.bandwidth
    else:
        positive = d[d > 0]
        sigma = float(np.median(positive)) if positive.size else 1.0
    return np.exp(-(d**2) / (sigma**2))


@dataclass(frozen=True)
class SurrogateModel:
    """Fitted linear surrogate: prediction = intercept + coefficients . x."""

    coefficients: np.ndarray
    intercept: float
    feature_specs: tuple[FeatureSpec, ...]
    kernel: KernelConfig
    weighted_rmse: float

    def __post_init__(self) -> None:
        coef = np.asarray(self.coefficients, dtype=float)
        if coef.ndim != 1 or coef.size != len(self.feature_specs):
            raise DimensionError("one coefficient per feature spec required")
        coef.flags.writeable = False
        object.__setattr__(self, "coefficients", coef)
        object.__setattr__(self, "feature_specs", tuple(self.feature_specs))

    def predict_features(self, x) -> float:
        return float(self.intercept + self.coefficients @ as_values(x))


def fit_wls(
    X,
    y,
    weights,
    ridge: float = DEFAULT_RIDGE,
    feature_specs: tuple[FeatureSpec, ...] | None = None,
    kernel: KernelConfig | None = None,
) -> SurrogateModel:
    """Weighted least squares with a ridge penalty on the slopes.

    Minimises sum_i w_i (y_i - b0 - L.x_i)^2 + ridge * ||L||^2; the
    intercept is never penalised. With ridge = 0 a rank-deficient design
    raises instead of silently picking one of many solutions.
    """
    if isinstance(X, FeatureMatrix):
        feature_specs = X.specs
        matrix = X.matrix
    else:
        matrix = np.asarray(X, dtype=float)
        if matrix.ndim == 1:
            matrix = matrix[:, None]
        if feature_specs is None:
            feature_specs = tuple(
                FeatureSpec.lag(i + 1, label=f"x{i + 1}")
                for i in range(matrix.shape[1])
            )
    y = as_values(y)
    w = as_values(weights)
    p, n_feat = matrix.shape
    if y.size != p or w.size != p:
        raise DimensionError("X, y and weights must agree on sample count")
    if np.any(w <= 0):
        raise ConfigurationError("weights must be strictly positive")
    if ridge < 0:
        raise ConfigurationError("ridge must be non-negative")
    if p < n_feat + 1:
        raise ConfigurationError(
            f"{p} samples cannot determine {n_feat} coefficients plus intercept"
        )

    design = np.column_stack([np.ones(p), matrix])
    gram = design.T @ (design * w[:, None])
    penalty = np.full(n_feat + 1, ridge)
    penalty[0] = 0.0  # intercept unpenalised
    gram = gram + np.diag(penalty)
    rhs = design.T @ (w * y)
    if ridge == 0 and np.linalg.matrix_rank(gram) < n_feat + 1:
        raise SingularSystemError(
            "design is rank-deficient; supply a positive ridge value"
        )
    try:
        beta = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(
            "normal equations are singular; supply a positive ridge value"
        ) from exc

    residuals = y - design @ beta
    weighted_rmse = float(np.sqrt(np.sum(w * residuals**2) / np.sum(w)))
    return SurrogateModel(
        coefficients=beta[1:],
        intercept=float(beta[0]),
        feature_specs=tuple(feature_specs),
        kernel=kernel if kernel is not None else KernelConfig(kind="none"),
        weighted_rmse=weighted_rmse,
    )


def _sign(coefficient: float) -> str:
    if coefficient > 0:
        return "+"
    if coefficient < 0:
        return "-"
    return "0"


def sign_rule_text() -> str:
    """How to read a signed feature weight, for human-facing feedback."""
    return (
        "A feature with a positive weight pushes the forecast the same way "
        "its value moves: increase the value and the prediction rises, "
        "decrease it and the prediction falls. A feature with a negative "
        "weight works in the opposite direction."
    )


@dataclass(frozen=True)
class Explanation:
    """The explanation artifact for one queried window."""

    feature_labels: tuple[str, ...]
    coefficients: np.ndarray
    intercept: float
    black_box_prediction: float
    surrogate_prediction: float
    perturbation: PerturbationConfig
    kernel: KernelConfig
    training_targets: np.ndarray = field(repr=False)
    sample_hash: str = ""
    weighted_rmse: float = 0.0

    def signs(self) -> tuple[str, ...]:
        return tuple(_sign(c) for c in self.coefficients.tolist())

    def to_dict(self) -> dict:
        return {
            "features": [
                {"feature_label": label, "coefficient": float(coef), "sign": sign}
                for label, coef, sign in zip(
                    self.feature_labels, self.coefficients.tolist(), self.signs()
                )
            ],
            "black_box_prediction": self.black_box_prediction,
            "surrogate_prediction": self.surrogate_prediction,
            "intercept": self.intercept,
            "weighted_rmse": self.weighted_rmse,
            "perturbation": {
                "block_length": self.perturbation.block_length,
                "block_swap": self.perturbation.block_swap,
                "sample_count": self.perturbation.sample_count,
                "ma_window": self.perturbation.ma_window,
                "rng_seed": self.perturbation.rng_seed,
            },
            "kernel": {
                "kind": self.kernel.kind,
                "bandwidth": self.kernel.bandwidth,
            },
            "sample_hash": self.sample_hash,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def explain_window(
    window,
    forecaster,
    specs,
    pcfg: PerturbationConfig,
    kcfg: KernelConfig | None = None,
    ridge: float = DEFAULT_RIDGE,
    samples: SampleSet | None = None,
) -> tuple[SurrogateModel, Explanation]:
    """Fit a local surrogate for the forecaster around one queried window.

    Steps, in order: bootstrap samples (or the precomputed set handed in),
    distances to the query, black-box targets for every sample, feature
    matrix at the forecast time, proximity weights, weighted fit. A
    precomputed SampleSet allows paired designs where only the kernel
    differs between arms.
    """
    values = as_values(window)
    kcfg = kcfg if kcfg is not None else KernelConfig()
    if samples is None:
        samples = generate_samples(values, pcfg)
    elif samples.window_length != values.size:
        raise DimensionError("precomputed samples do not match the window length")

    distances = distance_vector(values, samples)
    targets = np.array(
        [float(forecaster.predict(row)) for row in samples.samples], dtype=float
    )
    matrix = build_feature_matrix(samples, specs)
    weights = kernel_weights(distances, kcfg)
    model = fit_wls(matrix, targets, weights, ridge=ridge, kernel=kcfg)

    surrogate_pred = surrogate_predict(model, values)
    black_box_pred = float(forecaster.predict(values))
    explanation = Explanation(
        feature_labels=matrix.labels,
        coefficients=model.coefficients,
        intercept=model.intercept,
        black_box_prediction=black_box_pred,
        surrogate_prediction=surrogate_pred,
        perturbation=samples.config,
        kernel=kcfg,
        training_targets=targets,
        sample_hash=samples.content_hash(),
        weighted_rmse=model.weighted_rmse,
    )
    return model, explanation


def surrogate_predict(model: SurrogateModel, window) -> float:
    """Evaluate the surrogate on a window's own features at t = q + 1."""
    values = as_values(window)
    x = feature_row(values, model.feature_specs, values.size + 1)
    return model.predict_features(x)
