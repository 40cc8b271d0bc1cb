"""Exception hierarchy.

Errors fall into two families so the command line can map them to exit
codes: :class:`DataError` (bad or unreadable input) and
:class:`NumericalError` (a computation that cannot proceed).
"""


class RdcError(Exception):
    """Base class for every error raised by this package."""


class DataError(RdcError):
    pass


class NumericalError(RdcError):
    pass


class SpdValidationError(DataError):
    """Input rejected while constructing an :class:`~rdc_reid.spd.SpdMatrix`."""


class NotSymmetric(SpdValidationError):
    pass


class NotPositiveDefinite(SpdValidationError):
    pass


class NonFinite(SpdValidationError):
    pass


class DimensionMismatch(DataError):
    pass


class FormatError(DataError):
    """Malformed matrix, model, PPM or PGM file."""


class TooFewForegroundPixels(DataError):
    pass


class TooFewSamples(DataError):
    pass


class MalformedRankList(DataError):
    pass


class NoEligibleIdentities(DataError):
    pass


class EigenFailure(NumericalError):
    pass


class SingularTransform(NumericalError):
    pass


class SingletonOwnClass(NumericalError):
    """A training class has one member, so its own-class mean is undefined."""


class DegenerateScatter(NumericalError):
    pass
