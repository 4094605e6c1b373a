"""Exception types shared across the package."""


class RiskLabError(Exception):
    """Base class for all risklab errors."""


class DataError(RiskLabError):
    """Raised when input data cannot be loaded, parsed, or aligned."""


class ConfigError(RiskLabError):
    """Raised when a run configuration is missing, malformed, or inconsistent."""


class SolverError(RiskLabError):
    """Raised when an optimizer fails in a way the caller cannot recover from."""
