"""Exception hierarchy shared by every stage of the pipeline."""


class GBTError(Exception):
    """Base class for all package errors."""


class DataError(GBTError, ValueError):
    """Input data violates a domain constraint."""


class ParseError(DataError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BoundsError(DataError):
    pass


class DomainError(DataError):
    pass


class ConfigError(GBTError, ValueError):
    pass


class DimensionError(GBTError, ValueError):
    pass


class DegeneratePatchError(DataError):
    """Region has zero total counts, so the peak-to-average ratio is undefined."""


class TrainingError(GBTError):
    def __init__(self, message, granule=None, level=None):
        self.granule = granule
        self.level = level
        super().__init__(message)


class ConvergenceError(TrainingError):
    """Solver hit its iteration budget; ``diagnostics`` holds the best-so-far state."""

    def __init__(self, message, diagnostics=None, granule=None, level=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message, granule=granule, level=level)


class ModelFormatError(GBTError, ValueError):
    pass


class VersionError(ModelFormatError):
    pass


class TruncatedModelError(ModelFormatError):
    pass


class ChecksumError(ModelFormatError):
    pass


class UndefinedMetricError(GBTError, ArithmeticError):
    """A ratio metric has a zero denominator."""

    def __init__(self, metric):
        self.metric = metric
        super().__init__(f"{metric} is undefined (zero denominator)")
