"""Exception types shared across the package."""


class CMNLSError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(CMNLSError, ValueError):
    """Invalid model parameters (e.g. gamma = 0)."""


class ConjugationOverflowError(CMNLSError, OverflowError):
    """``exp(theta * Lambda_hat)`` would overflow double precision."""


class FieldDataError(CMNLSError, ValueError):
    """Malformed field data (grids, shapes)."""


class CornerMismatchError(FieldDataError):
    """Initial and boundary data disagree at the corner (x, t) = (0, 0)."""


class DecayViolationError(FieldDataError):
    """Initial data does not decay towards the right edge of the grid."""


class OutOfDomainError(CMNLSError, ValueError):
    """A sample point lies outside the data grid."""


class InteriorMissingError(CMNLSError, LookupError):
    """Off-axis samples were requested but the dataset carries no interior solution."""


class StencilRangeError(CMNLSError, ValueError):
    """A finite-difference stencil reaches outside the available data."""


class CFLViolationError(CMNLSError, ValueError):
    """Time step exceeds ``c_stab * dx**2``."""


class SolverInstabilityError(CMNLSError, RuntimeError):
    """The reference solver detected norm blow-up."""


class ValidityDomainError(CMNLSError, ValueError):
    """An eigenfunction column was requested outside its bounded domain."""

    def __init__(self, message, column=None, growth=None):
        super().__init__(message)
        self.column = column
        self.growth = growth


class SingularDenominatorError(CMNLSError, ZeroDivisionError):
    """A scalar spectral function used as a denominator is (numerically) zero."""

    def __init__(self, message, name=None, value=None):
        super().__init__(message)
        self.name = name
        self.value = value


class RegionError(CMNLSError, ValueError):
    """A spectral point is not inside the region an operation requires."""


class UnresolvedZeroError(CMNLSError, RuntimeError):
    """Argument-principle count and refined zeros disagree."""


class DegenerateZeroError(CMNLSError, ZeroDivisionError):
    """A secondary denominator vanishes at a zero (outside the simple-zero setting)."""


class SchemaError(CMNLSError, ValueError):
    """A dataset or config document does not match the expected layout."""
