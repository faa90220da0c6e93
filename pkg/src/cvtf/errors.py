"""Exception types shared across the package."""


class CvtfError(ValueError):
    """Base class for all errors raised by cvtf."""


class NegativeEntry(CvtfError):
    """A probability entry is below the negativity floor."""


class NotNormalized(CvtfError):
    """A probability vector/grid does not sum to one within tolerance."""


class DimensionTooSmall(CvtfError):
    """A requested output dimension cannot hold the result."""


class DimensionMismatch(CvtfError):
    """Operands have incompatible dimensions."""


class ToleranceUnreachable(CvtfError):
    """The requested trace-deficit tolerance cannot be met in the given dimension."""


class OutOfRange(CvtfError):
    """A scalar argument lies outside its admissible interval."""


class SingularSum(CvtfError):
    """Covariance-sum determinant is non-positive."""


class RegimeViolation(CvtfError):
    """Parameters fall outside the validity regime of a closed form.

    Attributes
    ----------
    thresholds : tuple of float
        The violated bound(s) on E (or 2E).
    """

    def __init__(self, message, thresholds=()):
        super().__init__(message)
        self.thresholds = tuple(thresholds)


class Infeasible(CvtfError):
    """The feasible set of an optimization subproblem is empty (defensive)."""


class BudgetExceeded(CvtfError):
    """A brute-force enumeration would exceed its evaluation budget."""
