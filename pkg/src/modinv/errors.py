"""Exception types raised by modinv.

Every error derives from :class:`ModinvError`. Input-validation failures also
derive from :class:`ValueError`, so callers that only care about "bad input"
can catch that instead.
"""


class ModinvError(Exception):
    """Base class for all library errors."""


class ConfigInvalid(ModinvError, ValueError):
    pass


class NumericalFailure(ModinvError):
    """A numerical routine could not produce a trustworthy answer."""


# grid / field
class GridMismatch(ModinvError, ValueError):
    pass


class NonFinite(ModinvError, ValueError):
    pass


class ZeroField(ModinvError, ValueError):
    pass


class ZeroReference(ModinvError, ValueError):
    pass


class TooFewPoints(ModinvError, ValueError):
    pass


class UnsortedPoints(ModinvError, ValueError):
    pass


class DomainNotCovered(ModinvError, ValueError):
    pass


class DuplicateTimes(ModinvError, ValueError):
    pass


class TooFewSlices(ModinvError, ValueError):
    pass


class GridTooSmall(ModinvError, ValueError):
    pass


# modulating functions / basis
class InvalidSize(ModinvError, ValueError):
    pass


class InvalidDomain(ModinvError, ValueError):
    pass


class InvalidCount(ModinvError, ValueError):
    pass


class OrderTooLow(ModinvError, ValueError):
    pass


class OrderUnsupported(ModinvError, ValueError):
    pass


class IndexOutOfRange(ModinvError, IndexError):
    pass


class PointOutsideDomain(ModinvError, ValueError):
    pass


# forward solver
class CflViolation(ModinvError, ValueError):
    pass


# estimation
class UnderdeterminedShape(ModinvError, ValueError):
    pass


class ZeroMeasurement(ModinvError, ValueError):
    pass


class DegenerateDenominator(NumericalFailure, ValueError):
    pass


class RankDeficient(NumericalFailure):
    """Raised only when a caller asks for rank deficiency to be fatal."""
