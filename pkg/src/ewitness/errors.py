"""Exception types raised across the package."""


class DimensionError(ValueError):
    """Operator shape does not match the declared subsystem dimensions."""


class OversizedProblemError(ValueError):
    """Total Hilbert-space dimension exceeds the configured maximum."""


class NotHermitianError(ValueError):
    """A Hermitian operator was required."""


class NumericalBreakdownError(RuntimeError):
    """An iterative numerical routine failed to converge."""


class ValidationError(ValueError):
    """A candidate density operator failed one of its invariants.

    Attributes
    ----------
    invariant : str
        Name of the violated invariant (``"dims"``, ``"finite"``,
        ``"hermitian"``, ``"trace"`` or ``"psd"``).
    deviation : float
        Measured value that broke the invariant.
    """

    def __init__(self, invariant: str, deviation: float, message: str):
        super().__init__(message)
        self.invariant = invariant
        self.deviation = deviation
