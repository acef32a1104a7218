"""Exception and warning types shared across the package."""


class FdrelaxError(Exception):
    """Base class for package-specific errors."""


class ConfigurationError(FdrelaxError, ValueError):
    """Invalid parameter value or inconsistent configuration."""


class ShapeError(FdrelaxError, ValueError):
    """Array does not conform to the grid it is used with."""


class RootFindError(FdrelaxError, RuntimeError):
    """Scalar root finder failed to converge.

    Carries the target value and the last bracket examined so the caller
    can tell an out-of-range input from a genuine solver breakdown.
    """

    def __init__(self, message, target=None, bracket=None):
        super().__init__(message)
        self.target = target
        self.bracket = bracket


class QuadratureError(FdrelaxError, RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


class NewtonError(FdrelaxError, RuntimeError):
    """Newton iteration failed; carries the increment history."""

    def __init__(self, message, increments=(), residuals=()):
        super().__init__(message)
        self.increments = list(increments)
        self.residuals = list(residuals)


class StepFailureError(NewtonError):
    """The nonlinear solve of a time step did not converge."""

    def __init__(self, message, step_index=None, increments=(), residuals=()):
        super().__init__(message, increments=increments, residuals=residuals)
        self.step_index = step_index


class DivergenceError(StepFailureError):
    """Non-finite values appeared during a solve."""


class LinearSolveError(FdrelaxError, RuntimeError):
    """Inner linear solver could not meet its residual tolerance."""


class H3AdvisoryWarning(UserWarning):
    """mu * L_alpha >= 1 on the range implied by the initial data bounds.

    Advisory only: the implicit scheme remains solvable, but the monotone
    decomposition underlying the two-field splitting is no longer strictly
    contractive on the whole solution range.
    """
