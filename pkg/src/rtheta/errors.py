"""Exception and warning types shared across the package."""


class RThetaError(Exception):
    """Base class for all package errors."""


class DomainError(RThetaError, ValueError):
    """Input size lies outside a basis function's domain."""


class BasisOverflowError(RThetaError, OverflowError):
    """Basis value does not fit in a double."""


class InsufficientData(RThetaError, ValueError):
    """Too few distinct input sizes to fit a series."""


class EmptyInput(RThetaError, ValueError):
    pass


class ProfilerUnavailable(RThetaError):
    """The platform profiler is missing or not permitted to count events."""


class ParseError(RThetaError, ValueError):
    """A profiler output line could not be interpreted.

    The offending line is kept verbatim on ``line``.
    """

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"{message}: {line!r}")
        self.line = line


class SpawnError(RThetaError):
    pass


class CompilerUnavailable(RThetaError):
    pass


class MalformedFile(RThetaError, ValueError):
    pass


class SchemaMismatch(RThetaError, ValueError):
    pass


class DegenerateStratum(RThetaError, ValueError):
    pass


class DegenerateLabels(UserWarning):
    """Training labels contain a single class; a constant leaf was returned."""


class EmptyClass(UserWarning):
    """A one-vs-rest class had no positive training rows."""
