"""Interpretable window features: lag, rolling-window mean, trailing mean.

Time indices are 1-based throughout: y_1 is the first observation and a
feature at time t may only look at y_1 .. y_(t-1). A feature that would
reach before y_1 is undefined and evaluates to None, never to a sentinel
number.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import ConfigurationError, SpecValidationError
from .perturbation import SampleSet
from .series import as_values

__all__ = [
    "FeatureSpec",
    "FeatureMatrix",
    "lag",
    "rolling_window",
    "expanding_window",
    "evaluate_feature",
    "build_feature_matrix",
    "parse_feature_specs",
    "feature_family",
]

Kind = Literal["lag", "rolling", "expanding"]


def lag(values, t: int, k: int) -> float | None:
    """Value k steps before t, i.e. y_(t-k); undefined unless k < t."""
    v = as_values(values)
    if t < 1 or k < 1:
        raise ConfigurationError("t and k must be positive")
    if k >= t:
        return None
    return float(v[t - k - 1])


def rolling_window(values, t: int, k: int, w: int) -> float | None:
    """Mean of the w values ending k steps before t.

    Covers y_(t-k-w+1) .. y_(t-k); defined when k < t and w <= t - k.
    """
    v = as_values(values)
    if t < 1 or k < 1 or w < 1:
        raise ConfigurationError("t, k and w must be positive")
    if not (k < t and w <= t - k):
        return None
    return float(v[t - k - w : t - k].mean())


def expanding_window(values, t: int, w: int) -> float | None:
    """Mean of the w most recent values before t, y_(t-w) .. y_(t-1).

    Despite the name this is a trailing mean of fixed width w anchored at
    t - 1; defined when w < t.
    """
    v = as_values(values)
    if t < 1 or w < 1:
        raise ConfigurationError("t and w must be positive")
    if w >= t:
        return None
    return float(v[t - w - 1 : t - 1].mean())


@dataclass(frozen=True)
class FeatureSpec:
    """One declarative feature column.

    Use the classmethod constructors; they enforce which parameters each
    kind takes. The default label doubles as the CLI syntax for the feature.
    """

    kind: Kind
    k: int | None = None
    w: int | None = None
    label: str = ""

    def __post_init__(self) -> None:
        if self.kind == "lag":
            ok = self.k is not None and self.k >= 1 and self.w is None
        elif self.kind == "rolling":
            ok = (
                self.k is not None
                and self.w is not None
                and self.k >= 1
                and self.w >= 1
            )
        elif self.kind == "expanding":
            ok = self.w is not None and self.w >= 1 and self.k is None
        else:
            ok = False
        if not ok:
            raise ConfigurationError(f"invalid feature spec {self!r}")
        if not self.label:
            object.__setattr__(self, "label", self._default_label())

    def _default_label(self) -> str:
        if self.kind == "lag":
            return f"lag:{self.k}"
        if self.kind == "rolling":
            return f"rw:{self.k}:{self.w}"
        return f"ew:{self.w}"

    @classmethod
    def lag(cls, k: int, label: str = "") -> "FeatureSpec":
        return cls(kind="lag", k=k, label=label)

    @classmethod
    def rolling(cls, k: int, w: int, label: str = "") -> "FeatureSpec":
        return cls(kind="rolling", k=k, w=w, label=label)

    @classmethod
    def expanding(cls, w: int, label: str = "") -> "FeatureSpec":
        return cls(kind="expanding", w=w, label=label)

    def defined_at(self, t: int) -> bool:
        if self.kind == "lag":
            return self.k < t
        if self.kind == "rolling":
            return self.k < t and self.w <= t - self.k
        return self.w < t


def evaluate_feature(spec: FeatureSpec, values, t: int) -> float | None:
    """Evaluate a single spec on a value vector at 1-based time t."""
    if spec.kind == "lag":
        return lag(values, t, spec.k)
    if spec.kind == "rolling":
        return rolling_window(values, t, spec.k, spec.w)
    return expanding_window(values, t, spec.w)


@dataclass(frozen=True)
class FeatureMatrix:
    """Feature evaluations at forecast time, one row per sample."""

    matrix: np.ndarray  # shape (p, n_features)
    specs: tuple[FeatureSpec, ...]

    def __post_init__(self) -> None:
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[1] != len(self.specs):
            raise ConfigurationError("matrix shape does not match spec list")
        matrix.flags.writeable = False
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "specs", tuple(self.specs))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(spec.label for spec in self.specs)


def _check_specs(specs, t: int) -> tuple[FeatureSpec, ...]:
    specs = tuple(specs)
    if not specs:
        raise ConfigurationError("at least one feature spec is required")
    seen: set[str] = set()
    for spec in specs:
        if spec.label in seen:
            raise ConfigurationError(f"duplicate feature label {spec.label!r}")
        seen.add(spec.label)
        if not spec.defined_at(t):
            raise SpecValidationError(
                f"feature {spec.label!r} is undefined at t={t}"
            )
    return specs


def feature_row(values, specs, t: int) -> np.ndarray:
    """Evaluate an ordered spec list on one window at 1-based time t."""
    specs = _check_specs(specs, t)
    return np.array(
        [evaluate_feature(spec, values, t) for spec in specs], dtype=float
    )


def build_feature_matrix(samples, specs) -> FeatureMatrix:
    """Evaluate specs on every sample at the forecast time t = q + 1.

    Accepts a SampleSet or any (p, q) array. Every spec must be defined at
    q + 1; the offending spec is named otherwise.
    """
    rows = samples.samples if isinstance(samples, SampleSet) else np.asarray(
        samples, dtype=float
    )
    if rows.ndim != 2:
        raise ConfigurationError("samples must be a (p, q) matrix")
    q = rows.shape[1]
    t = q + 1
    specs = _check_specs(specs, t)
    columns = []
    for spec in specs:
        if spec.kind == "lag":
            columns.append(rows[:, q - spec.k])
        elif spec.kind == "rolling":
            columns.append(rows[:, t - spec.k - spec.w : t - spec.k].mean(axis=1))
        else:
            columns.append(rows[:, q - spec.w : q].mean(axis=1))
    return FeatureMatrix(matrix=np.column_stack(columns), specs=specs)


def parse_feature_specs(text: str) -> list[FeatureSpec]:
    """Parse the compact spec syntax: ``lag:k``, ``rw:k:w``, ``ew:w``.

    Entries are comma-separated, e.g. ``lag:1,lag:2,rw:1:3,ew:5``.
    """
    specs: list[FeatureSpec] = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(":")
        try:
            if parts[0] == "lag" and len(parts) == 2:
                specs.append(FeatureSpec.lag(int(parts[1])))
            elif parts[0] == "rw" and len(parts) == 3:
                specs.append(FeatureSpec.rolling(int(parts[1]), int(parts[2])))
            elif parts[0] == "ew" and len(parts) == 2:
                specs.append(FeatureSpec.expanding(int(parts[1])))
            else:
                raise ConfigurationError(f"unknown feature spec {chunk!r}")
        except ValueError as exc:
            raise ConfigurationError(f"bad number in feature spec {chunk!r}") from exc
    if not specs:
        raise ConfigurationError("empty feature spec list")
    return specs


def feature_family(name: str, q: int) -> list[FeatureSpec]:
    """Default spec families for a window of length q.

    lag: offsets 1..q; rw: offsets 1..3 with width 3; ew: widths 1..5.
    """
    if name == "lag":
        return [FeatureSpec.lag(k) for k in range(1, q + 1)]
    if name == "rw":
        return [FeatureSpec.rolling(k, 3) for k in range(1, 4)]
    if name == "ew":
        return [FeatureSpec.expanding(w) for w in range(1, 6)]
    raise ConfigurationError(f"unknown feature family {name!r}")
