"""Exception types shared across the package.

Two families matter to callers: ``ParameterError`` for invalid physical
parameters or configuration (CLI exit code 2) and ``NumericalError`` for
failures of the numerical machinery (CLI exit code 3).
"""


class ParameterError(ValueError):
    """A physical parameter or configuration value violates an invariant."""


class NumericalError(RuntimeError):
    """Base class for failures of quadrature, root finding or integration."""


class SelfEnergyPoleError(NumericalError):
    """The resolvent was evaluated on a pole of one of its self-energy terms."""


class ResolventPoleError(NumericalError):
    """The resolvent denominator underflowed (evaluation at a true pole)."""


class RootRefinementError(NumericalError):
    """Newton polishing could not drive a quartic root residual below tolerance."""


class DegeneratePolesError(NumericalError):
    """Two poles are too close for a simple-pole partial-fraction expansion."""


class CancellationLossError(NumericalError):
    """A residue sum lost too many significant digits to cancellation."""


class ToleranceNotReachedError(NumericalError):
    """Adaptive quadrature stopped short of the requested tolerance.

    Carries the best available estimate and the achieved error bound.
    """

    def __init__(self, message: str, value: float, error: float):
        super().__init__(message)
        self.value = value
        self.error = error


class StepUnderflowError(NumericalError):
    """The ODE step controller demanded a step below the minimum."""


class SlowConvergenceError(NumericalError):
    """The slowest decaying mode is below the rate floor.

    Carries the partial channel populations accumulated so far and a bound
    on the remainder (the norm still left in the system).
    """

    def __init__(self, message: str, partial: tuple, bound: float):
        super().__init__(message)
        self.partial = partial
        self.bound = bound


class RatioUndefinedError(NumericalError):
    """The branching-ratio denominator is consistent with zero."""
