"""Exception hierarchy shared by every module."""


class FCBCError(Exception):
    """Base class for all errors raised by this package."""


class StructuralError(FCBCError, ValueError):
    """Inputs are malformed: wrong shapes, bad bounds, out-of-range parameters."""


class BudgetInfeasibleError(FCBCError):
    """The cost budget cannot be met even with every violation set to 1."""


class SolverError(FCBCError):
    """Numerical failure inside an LP or elimination routine.

    Distinct from infeasibility; callers may retry with another backend.
    """

    retriable = True


class PropertyViolation(FCBCError, AssertionError):
    """A guaranteed property (rounding bounds, invariants) did not hold."""


class GuardExceeded(FCBCError):
    """Brute force refused because the search space is too large."""


class ConfigError(StructuralError):
    """Invalid run configuration."""


class DatasetError(StructuralError):
    """Base for dataset ingestion problems."""


class MissingColumnError(DatasetError):
    pass


class NonNumericFeatureError(DatasetError):
    pass


class EmptyDatasetError(DatasetError):
    pass
