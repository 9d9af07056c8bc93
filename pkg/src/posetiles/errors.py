"""Exception types shared across the package."""


class PosetilesError(Exception):
    """Base class for all package errors."""


class PosetError(PosetilesError):
    """Invalid poset data: cycles, duplicate ids, missing extremes."""


class ValidationError(PosetilesError):
    """A precondition on operation inputs is violated."""


class BudgetExceededError(PosetilesError):
    """A configured search or cell budget was exhausted.

    Distinct from UNSAT: no claim is made about the uncompleted search.
    """


class ArtifactError(PosetilesError):
    """Malformed artifact file; message names the offending field."""
