"""Exception types shared across the package."""


class EstimationError(RuntimeError):
    """Raised when an estimator cannot produce a usable value (e.g. too few
    pairs per bin); the message carries diagnostic counts."""


class FactorizationError(RuntimeError):
    """Raised when a covariance estimate cannot be repaired to positive
    semidefinite within the allowed jitter budget."""


class ConfigError(ValueError):
    """Raised for malformed run configuration; the message names the
    offending key."""
