"""Exception types shared across modules."""


class NumericalError(RuntimeError):
    """A numerical routine (quadrature, bisection) failed to converge.

    The message carries the diagnostics available at the failure point
    (estimates, brackets, tolerances) instead of silently degrading.
    """
