"""Exception hierarchy shared by every module."""


class CotransError(Exception):
    """Base class for all package errors."""


class MalformedWordError(CotransError, ValueError):
    pass


class UnsupportedOperationError(CotransError, TypeError):
    pass


class ComposabilityError(CotransError, ValueError):
    pass


class SpaceMismatchError(CotransError, TypeError):
    pass


class ConfigurationError(CotransError, ValueError):
    pass


class WindowRangeError(CotransError, ValueError):
    """A point left the truncation window of an infinite space."""


class IncompleteDefinitionError(CotransError, LookupError):
    pass


class SingularityError(CotransError, ArithmeticError):
    pass


class NumericOverflowError(CotransError, ArithmeticError):
    pass


class AdmissibilityError(CotransError, ValueError):
    pass


class RejectedError(CotransError, ValueError):
    """A construction precondition failed; ``witness`` holds the offending data."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class MorphismError(RejectedError):
    pass


class CommutationError(RejectedError):
    pass


class ParameterError(RejectedError):
    pass


class InconsistencyError(RejectedError):
    pass


class InvarianceError(RejectedError):
    pass


class OrthogonalityError(RejectedError):
    pass


class ConditioningError(RejectedError):
    pass


class SchemaError(CotransError, ValueError):
    pass
