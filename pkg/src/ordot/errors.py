"""Exception types shared across the package."""


class OrdotError(Exception):
    """Base class for all errors raised by this package."""


class InvalidMass(OrdotError):
    """Histogram entries are negative or do not sum to one."""


class DegenerateHistogram(OrdotError):
    """Total mass is zero, so no normalization exists."""


class InvalidClass(OrdotError):
    """Class index outside [0, n_classes)."""


class ShapeError(OrdotError):
    """Operands disagree in length, or exceed a supported size."""


class NonConvexMetric(OrdotError):
    """Power exponent below 1 does not define a convex ground metric."""


class UnsupportedFamily(OrdotError):
    """Metric family not handled by the requested solver."""


class OracleFailure(OrdotError):
    """Exact LP solver failed to terminate; a bug, not bad input."""


class UnderflowError(OrdotError):
    """Scaling kernel exp(-D/eps) underflowed; use a larger epsilon."""


class InvalidMixture(OrdotError):
    """Smoothing weights xi + eta exceed 1."""


class ConfigError(OrdotError):
    """Inconsistent or malformed configuration."""


class CsvParseError(OrdotError):
    """Malformed prediction CSV row."""


class DegenerateKappa(OrdotError):
    """Both marginals concentrate on one class; kappa denominator is zero."""


class UndefinedTPR(OrdotError):
    """A binary split lacks the samples needed to measure TPR or TNR."""


class TrainingDiverged(OrdotError):
    """Loss became non-finite during training."""

    def __init__(self, epoch: int, message: str = ""):
        self.epoch = epoch
        super().__init__(message or f"non-finite loss at epoch {epoch}")
