"""Exception types shared across the package.

Every error raised deliberately by this package derives from FreqcaError,
so callers can catch one base class at the CLI boundary.  Condition-specific
subclasses exist for every failure mode a caller might want to branch on.
"""


class FreqcaError(Exception):
    """Base class for all errors raised by this package."""


class ShapeMismatchError(FreqcaError):
    """Operands have incompatible shapes."""


class ZeroVectorError(FreqcaError):
    """Both vectors of a similarity computation have zero norm."""


class RankDeficientError(FreqcaError):
    """Least-squares design matrix has numerically deficient rank."""


class DegenerateCovarianceError(FreqcaError):
    """Trajectory carries no variance along a requested component."""


class InvalidCutoffError(FreqcaError):
    """Band cutoff does not produce two non-empty bands."""


class OrderTooHighError(FreqcaError):
    """Requested polynomial order exceeds the supported cap."""


class InsufficientHistoryError(FreqcaError):
    """Fit window holds fewer states than the requested order needs."""


class BackwardPredictionError(FreqcaError):
    """Prediction target precedes the newest state in the fit window."""


class EmptyCacheError(FreqcaError):
    """Reconstruction requested before any full step was recorded."""


class NonMonotoneStepError(FreqcaError):
    """Step indices passed to a fit are not non-decreasing."""


class InvalidIntervalError(FreqcaError):
    """Caching interval is not a positive integer within the schedule."""


class ConfigError(FreqcaError):
    """Configuration file is malformed; message names the offending field."""


class FormatError(FreqcaError):
    """Binary trajectory file is malformed or has the wrong version."""
