"""Exception types shared across the package."""


class HybridGraphError(Exception):
    """Base class for all package errors."""


class ValidationError(HybridGraphError, ValueError):
    """Malformed input record, bad argument, or violated precondition."""


class NotFoundError(HybridGraphError, LookupError):
    pass


class IngestError(ValidationError):
    """A snapshot file exceeded its reject budget."""

    def __init__(self, message, rejects=()):
        super().__init__(message)
        self.rejects = list(rejects)


class CorrectnessError(HybridGraphError, RuntimeError):
    """Engines disagreed on a result that must be identical."""


class CalibrationError(HybridGraphError, ValueError):
    pass
