"""Exception hierarchy.

Every error raised by the package derives from :class:`DegenvacError`;
argument problems additionally derive from :class:`ValueError` so callers
can catch them the usual way.
"""


class DegenvacError(Exception):
    pass


class InvalidInput(DegenvacError, ValueError):
    pass


class GammaOutOfRange(InvalidInput):
    pass


class DeltaOutOfRange(InvalidInput):
    pass


class MinExponentTooLarge(InvalidInput):
    pass


class NegativeDensity(InvalidInput):
    pass


class NegativeTime(InvalidInput):
    pass


class InvalidSpec(InvalidInput):
    pass


class DomainTooSmall(InvalidInput):
    pass


class EmptyState(InvalidInput):
    pass


class OutOfDomain(InvalidInput):
    pass


class NonMonotoneTarget(InvalidInput):
    pass


class InsufficientLevels(InvalidInput):
    pass


class CflViolation(DegenvacError):
    pass


class NonFiniteValue(DegenvacError):
    pass


class NoCrossing(DegenvacError):
    def __init__(self, t_max: float):
        super().__init__(f"envelopes do not cross on (0, {t_max:g}]; increase t_max")
        self.t_max = t_max


class ParseError(DegenvacError):
    def __init__(self, message: str, line: int | None = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


class ValidationError(DegenvacError):
    """A configuration value breaks an admissibility condition; ``constraint``
    names the condition."""

    def __init__(self, message: str, constraint: str | None = None):
        super().__init__(message)
        self.constraint = constraint
