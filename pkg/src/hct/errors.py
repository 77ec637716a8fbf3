"""Exception types raised across the package."""


class HctError(Exception):
    """Base class for all package errors."""


class DegenerateSample(HctError, ValueError):
    """A sample (or resample) has zero variance, so the t ratio is undefined."""


class InfiniteMoment(HctError, ValueError):
    """The requested distribution has no finite mean or variance."""


class ConfigError(HctError, ValueError):
    """An experiment or signal configuration is invalid."""


class InsufficientResamples(HctError, ValueError):
    """Too few bootstrap draws to resolve the requested tail quantile."""


class EmptyGrid(HctError, ValueError):
    """The higher-criticism alpha grid contains no points."""


class NotDetectable(HctError, ValueError):
    """(beta, r) lies on or below the detection boundary."""


class MissingQuantile(HctError, KeyError):
    """An oracle quantile table does not cover a requested (column, alpha)."""


class NumericValidityError(HctError, ArithmeticError):
    """An approximation was evaluated outside the region where it is valid."""
