"""Exception hierarchy shared by the solver modules."""


class PNPError(Exception):
    """Base class for all solver errors."""


class DimensionError(PNPError, ValueError):
    """Fields live on different grids or have incompatible shapes."""


class PositivityError(PNPError, ValueError):
    """A concentration that must be strictly positive is not."""


class UnsupportedBoundaryError(PNPError, ValueError):
    """A boundary condition type is not allowed for this operator."""


class CompatibilityError(PNPError, ValueError):
    """Right-hand side of a singular (pure Neumann / periodic) problem has nonzero mean."""


class ConvergenceError(PNPError, RuntimeError):
    """An iterative solver failed to reach its tolerance.

    Attributes
    ----------
    x : ndarray or None
        Best iterate found.
    history : list of float
        Residual norms recorded during the iteration.
    """

    def __init__(self, message, x=None, history=None):
        super().__init__(message)
        self.x = x
        self.history = list(history) if history is not None else []


class ZeroPivotError(PNPError, ArithmeticError):
    """Incomplete factorization hit a zero (or missing) pivot."""


class NewtonConvergenceError(ConvergenceError):
    """Newton iteration exceeded its iteration budget."""

    def __init__(self, message, x=None, history=None, stats=None):
        super().__init__(message, x=x, history=history)
        self.stats = stats


class StepRejectedError(ConvergenceError):
    """Backtracking line search could not find an acceptable step."""

    def __init__(self, message, x=None, history=None, stats=None):
        super().__init__(message, x=x, history=history)
        self.stats = stats


class SingularProblemError(PNPError, ValueError):
    """Boundary data do not determine a unique solution."""
