"""Exception hierarchy shared by every coherand module."""


class CoherandError(ValueError):
    """Base class for all errors raised by coherand."""


class NotHermitian(CoherandError):
    pass


class NotUnitary(CoherandError):
    pass


class NotTracePreserving(CoherandError):
    pass


class NotAState(CoherandError):
    """Matrix fails the density-matrix invariants (PSD, unit trace)."""


class DimMismatch(CoherandError):
    pass


class BadSplit(DimMismatch):
    """Declared subsystem dimensions do not factor the object."""


class LabelMismatch(CoherandError):
    pass


class LengthMismatch(CoherandError):
    pass


class DomainError(CoherandError):
    pass


class AlphaOutOfRange(DomainError):
    pass


class BlochOutOfBall(DomainError):
    pass


class NoConvergence(CoherandError):
    pass


class ResourceCapError(CoherandError):
    """A configured size cap would be exceeded."""


class DimensionOverflow(ResourceCapError):
    pass


class DimCap(ResourceCapError):
    pass


class TooLarge(ResourceCapError):
    pass
