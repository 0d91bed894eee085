"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside an operation's mathematical domain."""


class CapacityError(RuntimeError):
    """A requested computation exceeds the documented size bounds."""


class ValidationError(ValueError):
    """A constructed object violates one of its invariants."""

    def __init__(self, message, *, residual=None, detail=None):
        super().__init__(message)
        self.residual = residual
        self.detail = detail


class NonDyadicError(ValidationError):
    """A probability has no dyadic form at the requested precision."""


class UnknownEventError(ValueError):
    """Event identifier not recognised by the event-probability engine."""
