"""Exception types shared across the package."""


class NatCopulaError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(NatCopulaError, ValueError):
    """An argument violates a documented precondition."""


class NumericalDomainError(NatCopulaError, ArithmeticError):
    """A computation produced or encountered a non-finite value."""


class DegenerateDensityError(NatCopulaError):
    """A density clamps to zero (or worse) over its whole domain."""


class InsufficientDataError(NatCopulaError):
    """Too few observations to run the requested operation."""


class IllConditionedFitError(NatCopulaError):
    """The least-squares design matrix is rank deficient at the solution."""


class ParseError(NatCopulaError):
    """A data file failed to parse.

    Carries the 1-based line number of the offending row.
    """

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class EmptySideError(NatCopulaError):
    """A book side has no usable volume."""


class SolverStallError(NatCopulaError):
    """The simplex solver exceeded its pivot budget."""


class EstimationInfeasibleError(NatCopulaError):
    """The estimation linear program has no feasible point."""


class ModelError(NatCopulaError):
    """An estimated model violates one of its own invariants."""
