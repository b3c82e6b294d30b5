"""Local surrogate explanations for univariate time-series forecasts.

Perturbs a queried window with a moving block bootstrap, scores the
samples with any one-step-ahead forecaster, and fits a distance-weighted
linear model over interpretable window features. The fitted coefficients
explain which parts of the recent history drive the forecast.
"""

from .errors import (
    AdapterError,
    AdapterTimeoutError,
    ConfigurationError,
    ConflictError,
    DegenerateRangeError,
    DimensionError,
    ExplainError,
    FittingError,
    GapError,
    IngestionError,
    InsufficientHistoryError,
    MetricError,
    SingularSystemError,
    SpecValidationError,
)
from .evaluation import (
    FidelityReport,
    GridResult,
    distance_ablation,
    evaluate_fidelity,
    fidelity,
    mann_whitney_u,
    run_grid,
)
from .features import (
    FeatureMatrix,
    FeatureSpec,
    build_feature_matrix,
    expanding_window,
    feature_family,
    lag,
    parse_feature_specs,
    rolling_window,
)
from .forecasters import (
    ARModel,
    ExternalForecaster,
    Forecaster,
    HoltWintersModel,
    ar_fit,
    ar_predict,
    build_forecaster,
    hw_fit,
    hw_fit_predict,
)
from .perturbation import (
    Decomposition,
    PerturbationConfig,
    SampleSet,
    decompose,
    derive_seed,
    enumerate_blocks,
    generate_samples,
    mbb_sample,
)
from .series import (
    NormalizationState,
    Series,
    fit_minmax,
    last_window,
    load_csv,
    minmax_normalize,
    resample_monthly,
)
from .surrogate import (
    Explanation,
    KernelConfig,
    SurrogateModel,
    euclidean_distance,
    explain_window,
    fit_wls,
    kernel_weights,
    surrogate_predict,
)
from .synthetic import QuadraticSeasonalForecaster, synthetic_series

__version__ = "0.1.0"
