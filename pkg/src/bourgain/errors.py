"""Exception hierarchy shared by all modules."""


class BourgainError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(BourgainError, ValueError):
    """Parameters violate a structural precondition."""


class DomainError(BourgainError, ValueError):
    """A function was applied outside its domain (log of a nonpositive value, ...)."""


class IndeterminateDivision(BourgainError, ZeroDivisionError):
    """Division by an enclosure that contains zero."""


class ScanRangeError(BourgainError):
    """The minimum over k was not bracketed by the scan range."""


class GeometryError(BourgainError):
    """The geometric denominator of the estimate is not certifiably positive."""


class ResolutionError(BourgainError, ValueError):
    """Requested cover resolution is finer than the digital set."""


class EmptySetError(BourgainError, ValueError):
    """Operation needs a nonempty digital set."""


class InputError(BourgainError, ValueError):
    """Malformed input file."""
