"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Raised when arguments violate a documented precondition."""


class NumericalError(RuntimeError):
    """Raised when an estimator or optimiser cannot produce a usable result.

    ``last_iterate`` carries whatever partial state was available.
    """

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class DegenerateEstimateWarning(RuntimeWarning):
    """An estimate was clipped or collapsed to a boundary value."""
