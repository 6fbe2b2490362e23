"""Exception hierarchy shared by all modules."""


class KMatrixError(Exception):
    """Base class for every error raised by this package."""


class InvalidDimensionError(KMatrixError, ValueError):
    pass


class AlgebraMismatchError(KMatrixError, ValueError):
    pass


class SingularMetricError(KMatrixError):
    pass


class ClosureError(KMatrixError, ValueError):
    pass


class ShapeMismatchError(KMatrixError, ValueError):
    pass


class NotQuasiClassicalError(KMatrixError):
    """Leading coefficient of an expansion is singular."""


class NormalizationRequiredError(KMatrixError):
    """Rational function grows at infinity; divide by a power of u first."""


class PoleError(KMatrixError, ZeroDivisionError):
    def __init__(self, message, factor=None):
        super().__init__(message)
        self.factor = factor


class NotFoundError(KMatrixError):
    def __init__(self, message, landscape=None):
        super().__init__(message)
        self.landscape = landscape


class InvalidSeedError(KMatrixError):
    """Seed matrix does not solve the constant classical boundary equation."""


class CbYBEViolationError(KMatrixError):
    pass


class SamplingInsufficientError(KMatrixError):
    pass


class UnsupportedRepPairError(KMatrixError):
    pass


class OutOfDomainError(KMatrixError, ValueError):
    pass


class HomomorphismError(KMatrixError, ValueError):
    pass


class AddressError(KMatrixError, ValueError):
    """Family or R-matrix address could not be resolved."""


class StageError(KMatrixError):
    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
