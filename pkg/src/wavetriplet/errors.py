"""Exception hierarchy.

Validation problems (bad shapes, violated preconditions, inconsistent
configuration) derive from :class:`ValidationError`; failures of the numerics
themselves derive from :class:`NumericalError`.  The command line maps the two
families to exit codes 1 and 2.
"""


class WaveTripletError(Exception):
    """Base class for all package errors."""


class ValidationError(WaveTripletError, ValueError):
    """An argument or configuration violates a documented precondition."""


class NumericalError(WaveTripletError, ArithmeticError):
    """A computation could not be carried out to the requested accuracy."""


class NotSquareError(ValidationError):
    pass


class NonFiniteError(ValidationError):
    pass


class AsymmetryError(ValidationError):
    pass


class IndefiniteWeightError(ValidationError):
    pass


class RankDeficientError(ValidationError):
    pass


class NotContractionError(ValidationError):
    """A matrix expected to be a contraction has operator norm above one."""


class NotMaximalDissipativeError(ValidationError):
    pass


class SumNotInjectiveError(ValidationError):
    """``W1 + W2`` has a nontrivial kernel."""


class RangeConditionError(ValidationError):
    """``ran(W1 - W2)`` is not contained in ``ran(W1 + W2)``."""


class DimensionMismatchError(ValidationError):
    pass


class PartitionError(ValidationError):
    """Boundary labels overlap, leave faces unlabeled, or are unknown."""


class MaterialError(ValidationError):
    pass


class AccretivityError(ValidationError):
    pass


class IncompatibleDataError(ValidationError):
    """Initial state and input violate ``u(0) = G x0``."""


class SingularStepError(NumericalError):
    """The implicit midpoint matrix is singular for the requested step."""


class SolverResidualError(NumericalError):
    pass
