"""
Exceptions raised by the graph path-integral and cosmology toolboxes.

Everything derives from TheoryXError so callers (the CLI in particular) can
catch one type and report the failing module.
"""


class TheoryXError(ValueError):
    """Base class for all toolbox errors."""


class GraphFormatError(TheoryXError):
    def __init__(self, message, line_number=None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class DanglingReferenceError(GraphFormatError):
    """A link or plaquette refers to a vertex or link that does not exist."""


class OpenPlaquetteError(GraphFormatError):
    """A plaquette's signed link chain does not close."""


class InvalidComplexError(TheoryXError):
    pass


class DimensionMismatchError(TheoryXError):
    pass


class SourceNotInRowSpaceError(TheoryXError):
    """J has a component along the null space of K."""


class NonPositiveEigenvalueError(TheoryXError):
    pass


class SingularActionalError(TheoryXError):
    """K has a zero eigenvalue, so det K = 0 and K has no inverse."""


class NullModeError(TheoryXError):
    """A probability was requested for a gauge (null-space) mode."""


class EigensolverError(TheoryXError):
    pass


class ModelParameterError(TheoryXError):
    pass


class QuadratureError(TheoryXError):
    pass


class DataFormatError(TheoryXError):
    def __init__(self, message, line_number=None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class EmptyDatasetError(TheoryXError):
    pass


class BoundsError(TheoryXError):
    pass


class DegenerateRegressionError(TheoryXError):
    pass


class EstimateOverflowError(TheoryXError):
    """A log-space estimate is too large to exponentiate."""
