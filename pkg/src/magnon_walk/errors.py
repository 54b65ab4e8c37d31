"""Exception types shared across the package."""


class MagnonWalkError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(MagnonWalkError, ValueError):
    """Invalid parameters or configuration, rejected before any computation."""


class EmptyFrameError(MagnonWalkError, ValueError):
    pass


class NeverDeclinesError(MagnonWalkError):
    """An OTOC series never drops below its decline threshold."""


class DegenerateFitError(MagnonWalkError):
    pass


class SystemTooLargeError(ValidationError):
    """Requested Hilbert space exceeds the memory guard."""


class DimensionMismatchError(MagnonWalkError, ValueError):
    pass


class UnsupportedGateError(MagnonWalkError):
    pass


class ToleranceError(MagnonWalkError):
    """A numerical comparison exceeded its tolerance."""
