"""Exception types shared across the package."""


class ExplainError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(ExplainError):
    """Invalid parameter value or parameter combination."""


class IngestionError(ExplainError):
    """Input data could not be read or violates the input contract."""


class GapError(IngestionError):
    """A calendar month inside the series range has no observations."""


class DegenerateRangeError(ExplainError):
    """Min-max scaling is undefined on a constant series."""


class InsufficientHistoryError(ExplainError):
    """A window longer than the available series was requested."""


class DimensionError(ExplainError):
    """Vector lengths do not line up."""


class SpecValidationError(ExplainError):
    """A feature spec is undefined at the requested time point."""


class SingularSystemError(ExplainError):
    """The weighted design is rank-deficient and no ridge penalty is applied."""


class FittingError(ExplainError):
    """A forecaster could not be fitted on the given training data."""


class AdapterError(ExplainError):
    """The external forecaster process misbehaved."""


class AdapterTimeoutError(AdapterError):
    """The external forecaster did not answer within the timeout."""


class ConflictError(ExplainError):
    """An append-only record for this key already exists."""


class MetricError(ExplainError):
    """A statistic is undefined on the given inputs."""
