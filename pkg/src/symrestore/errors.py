"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented precondition."""


class NumericalError(RuntimeError):
    """A numerical procedure failed or produced an unusable result."""


class EmptySectorError(NumericalError):
    """The requested symmetry sector has (numerically) zero weight."""
