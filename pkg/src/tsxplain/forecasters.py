"""One-step-ahead forecasters used as black boxes by the explainer.

Anything with a ``predict(window) -> float`` method qualifies; the
explainer never looks inside. Shipped implementations: least-squares
autoregression, additive Holt-Winters smoothing, and a line-protocol
adapter for external model processes.
"""

from __future__ import annotations

import queue
import shlex
import subprocess
import threading
from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from .errors import (
    AdapterError,
    AdapterTimeoutError,
    ConfigurationError,
    DimensionError,
    FittingError,
)
from .series import as_values

__all__ = [
    "Forecaster",
    "ARModel",
    "HoltWintersModel",
    "ExternalForecaster",
    "ar_fit",
    "ar_predict",
    "hw_fit",
    "hw_fit_predict",
    "build_forecaster",
]


@runtime_checkable
class Forecaster(Protocol):
    """Behavioral contract: a deterministic one-step-ahead prediction."""

    def predict(self, window) -> float: ...


@dataclass(frozen=True)
class ARModel:
    """Linear autoregression; coefficients[0] pairs with the newest value."""

    coefficients: np.ndarray
    intercept: float

    def __post_init__(self) -> None:
        coef = np.asarray(self.coefficients, dtype=float)
        if coef.ndim != 1 or coef.size < 1:
            raise ConfigurationError("coefficients must be a non-empty vector")
        coef.flags.writeable = False
        object.__setattr__(self, "coefficients", coef)

    @property
    def order(self) -> int:
        return self.coefficients.size

    def predict(self, window) -> float:
        return ar_predict(self, window)


def ar_fit(train, order: int) -> ARModel:
    """Ordinary least squares fit of y_t on its previous ``order`` values.

    Rank-deficient designs (e.g. constant series) resolve to the minimum-
    norm solution; the prediction contract still holds even though the
    coefficient/intercept split is then not unique.
    """
    values = as_values(train)
    if order < 1:
        raise ConfigurationError("order must be positive")
    n = values.size
    if n <= order + 1:
        raise FittingError(
            f"training length {n} too short for order {order} (need > order + 1)"
        )
    rows = n - order
    design = np.ones((rows, order + 1))
    for i in range(1, order + 1):
        design[:, i] = values[order - i : n - i]
    target = values[order:]
    try:
        beta, _, _, _ = np.linalg.lstsq(design, target, rcond=None)
    except np.linalg.LinAlgError as exc:
        raise FittingError("least squares did not converge") from exc
    return ARModel(coefficients=beta[1:], intercept=float(beta[0]))


def ar_predict(model: ARModel, window) -> float:
    values = as_values(window)
    p = model.order
    if values.size < p:
        raise DimensionError(f"window of {values.size} too short for order {p}")
    recent = values[-p:][::-1]  # newest first, matching coefficient order
    return float(model.intercept + model.coefficients @ recent)


@dataclass
class HoltWintersModel:
    """Additive Holt-Winters state, fitted by forward recursion.

    The smoothing pass over the training series is recorded so that
    ``predict(window)`` can resume from the state just before the final q
    training points: the window replaces that tail, which keeps the
    prediction a pure function of the window.
    """

    alpha: float
    beta: float
    gamma: float
    season_length: int
    train_length: int
    states: list[tuple[float, float, np.ndarray]]  # state before index t

    def predict(self, window) -> float:
        values = as_values(window)
        q = values.size
        if q > self.train_length:
            raise ConfigurationError(
                f"window of {q} exceeds training length {self.train_length}"
            )
        start = self.train_length - q
        level, trend, seasonals = self.states[start]
        seasonals = seasonals.copy()
        for offset, y in enumerate(values.tolist()):
            level, trend = _hw_step(
                y, level, trend, seasonals,
                (start + offset) % self.season_length,
                self.alpha, self.beta, self.gamma,
            )
        head = seasonals[self.train_length % self.season_length] if self.gamma > 0 else 0.0
        return float(level + trend + head)


def _hw_step(y, level, trend, seasonals, s_idx, alpha, beta, gamma):
    """One smoothing update; mutates the seasonal buffer in place."""
    seasonal = seasonals[s_idx] if gamma > 0 else 0.0
    new_level = alpha * (y - seasonal) + (1.0 - alpha) * (level + trend)
    new_trend = beta * (new_level - level) + (1.0 - beta) * trend
    if gamma > 0:
        seasonals[s_idx] = gamma * (y - new_level) + (1.0 - gamma) * seasonal
    return new_level, new_trend


def hw_fit(
    train, alpha: float, beta: float, gamma: float, season_length: int
) -> HoltWintersModel:
    """Fit additive Holt-Winters smoothing state on a training series.

    Initialisation is the usual one: level from the first season's mean,
    trend from the first-versus-second season means, seasonal offsets from
    the first season. gamma = 0 disables the seasonal component entirely.
    """
    values = as_values(train)
    for name, factor in (("alpha", alpha), ("beta", beta)):
        if not 0.0 < factor < 1.0:
            raise ConfigurationError(f"{name} must lie strictly inside (0, 1)")
    if gamma < 0 or gamma >= 1.0:
        raise ConfigurationError("gamma must lie in [0, 1); 0 disables seasonality")
    if season_length < 1:
        raise ConfigurationError("season_length must be positive")
    if gamma > 0 and season_length < 2:
        raise ConfigurationError("seasonal smoothing needs season_length >= 2")
    n = values.size
    L = season_length
    if n < 2 * L:
        raise FittingError(
            f"need at least two full seasons ({2 * L} points), got {n}"
        )

    level = float(values[:L].mean())
    trend = float((values[L : 2 * L].mean() - values[:L].mean()) / L)
    if gamma > 0:
        seasonals = values[:L] - level
    else:
        seasonals = np.zeros(L)
    seasonals = seasonals.astype(float)

    states: list[tuple[float, float, np.ndarray]] = []
    for t in range(n):
        states.append((level, trend, seasonals.copy()))
        level, trend = _hw_step(
            values[t], level, trend, seasonals, t % L, alpha, beta, gamma
        )
    states.append((level, trend, seasonals.copy()))
    return HoltWintersModel(
        alpha=alpha,
        beta=beta,
        gamma=gamma,
        season_length=L,
        train_length=n,
        states=states,
    )


def hw_fit_predict(
    train, alpha: float, beta: float, gamma: float, season_length: int, window
) -> float:
    """Fit on the training series and forecast one step past the window."""
    return hw_fit(train, alpha, beta, gamma, season_length).predict(window)


class ExternalForecaster:
    """Bridge to an external model process speaking a line protocol.

    Request: one line of comma-separated reals. Response: one line holding
    a single real, or ``ERR <message>`` for an adapter-side failure. Calls
    are serialised per instance; run several instances for parallelism.
    """

    def __init__(self, command: str | Sequence[str], timeout: float = 10.0):
        if timeout <= 0:
            raise ConfigurationError("timeout must be positive")
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        if not argv:
            raise ConfigurationError("adapter command must not be empty")
        self._argv = argv
        self._timeout = timeout
        self._lock = threading.Lock()
        self._lines: queue.Queue[str | None] = queue.Queue()
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise AdapterError(f"could not start adapter {argv!r}: {exc}") from exc
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self) -> None:
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)  # EOF marker

    def predict(self, window) -> float:
        values = as_values(window)
        request = ",".join(repr(v) for v in values.tolist()) + "\n"
        with self._lock:
            if self._proc.poll() is not None:
                raise AdapterError(
                    f"adapter exited with code {self._proc.returncode}"
                )
            try:
                assert self._proc.stdin is not None
                self._proc.stdin.write(request)
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise AdapterError("adapter closed its input stream") from exc
            try:
                line = self._lines.get(timeout=self._timeout)
            except queue.Empty:
                self.close()
                raise AdapterTimeoutError(
                    f"no response within {self._timeout} s"
                ) from None
        if line is None:
            code = self._proc.poll()
            raise AdapterError(f"adapter closed its output (exit code {code})")
        line = line.strip()
        if line.startswith("ERR "):
            raise AdapterError(f"adapter reported: {line[4:]}")
        try:
            return float(line)
        except ValueError as exc:
            raise AdapterError(f"malformed adapter response {line!r}") from exc

    def close(self) -> None:
        if self._proc.poll() is None:
            self._proc.terminate()
            try:
                self._proc.wait(timeout=2.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
        if self._proc.stdin is not None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass

    def __enter__(self) -> "ExternalForecaster":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def build_forecaster(spec: str, train) -> Forecaster:
    """Construct a forecaster from a compact spec string.

    ``ar:p`` fits an order-p autoregression on ``train``;
    ``hw:alpha,beta,gamma,season`` fits Holt-Winters;
    ``ext:<command line>`` starts an external adapter process.
    """
    kind, _, rest = spec.partition(":")
    if kind == "ar":
        try:
            order = int(rest)
        except ValueError as exc:
            raise ConfigurationError(f"bad AR order in {spec!r}") from exc
        return ar_fit(train, order)
    if kind == "hw":
        parts = rest.split(",")
        if len(parts) != 4:
            raise ConfigurationError(
                "hw spec needs alpha,beta,gamma,season e.g. hw:0.5,0.1,0.2,12"
            )
        try:
            alpha, beta, gamma = (float(p) for p in parts[:3])
            season = int(parts[3])
        except ValueError as exc:
            raise ConfigurationError(f"bad number in {spec!r}") from exc
        return hw_fit(train, alpha, beta, gamma, season)
    if kind == "ext":
        if not rest:
            raise ConfigurationError("ext spec needs a command line")
        return ExternalForecaster(rest)
    raise ConfigurationError(f"unknown model spec {spec!r} (use ar:/hw:/ext:)")
