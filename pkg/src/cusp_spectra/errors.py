"""Exception hierarchy shared by all modules."""


class CuspSpectraError(Exception):
    """Base class for every error raised by this package."""


class DomainError(CuspSpectraError, ValueError):
    """An argument lies outside the domain of the operation."""


class ContractError(CuspSpectraError):
    """A precondition on a surface, conformal factor or model was violated."""


class ConvergenceError(CuspSpectraError):
    """An iterative or adaptive procedure ran out of budget.

    Parameters
    ----------
    message : str
        Human readable description.
    estimate : float, optional
        The error estimate (or gradient norm) reached before giving up.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class ConditioningError(CuspSpectraError):
    """Least-squares design matrix is too ill-conditioned to trust."""

    def __init__(self, message, condition_number=None):
        super().__init__(message)
        self.condition_number = condition_number


class ModelMismatchError(CuspSpectraError):
    """A relative trace does not match its declared small-t expansion."""

    def __init__(self, message, worst_t=None, ratio=None):
        super().__init__(message)
        self.worst_t = worst_t
        self.ratio = ratio


class InconsistencyError(CuspSpectraError):
    """Two independent evaluation routes disagree beyond tolerance."""

    def __init__(self, message, values=None):
        super().__init__(message)
        self.values = values


class SurfaceLoadError(CuspSpectraError):
    """A surface file violates the schema or a surface invariant."""

    def __init__(self, message, invariant=None):
        super().__init__(message)
        self.invariant = invariant


class LineSearchError(ConvergenceError):
    """Armijo backtracking failed to find a decreasing step."""
