"""Exception types raised across the package."""


class AdmissibilityError(ValueError):
    """A signal violates a nonzero first/last coefficient requirement."""


class DegenerateBoundError(ValueError):
    """A bound is requested where its spectral quantity vanishes."""


class UndefinedBoundError(ValueError):
    """A bound is requested outside its size or separation preconditions."""


class GenerationError(RuntimeError):
    """Rejection sampling gave up before finding an acceptable pair."""


class ExtractionError(ValueError):
    """No positive leading eigenvalue to extract a signal from."""


class ConvergenceError(RuntimeError):
    """An iterative kernel hit its iteration cap.

    ``diagnostics`` carries whatever partial state the kernel had.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
