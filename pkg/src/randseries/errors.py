"""Exception types shared across the package."""


class RandSeriesError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(RandSeriesError, ValueError):
    """Invalid configuration, parameters, or input data (CLI exit code 2)."""


class EnumerationBudgetError(ConfigError):
    """Exact enumeration would exceed the configured budget; use Monte Carlo."""


class NumericalError(RandSeriesError, RuntimeError):
    """Numerical failure: underflow, non-convergence, degenerate estimates
    (CLI exit code 3)."""
