"""Exception hierarchy shared by every module."""


class NsresError(Exception):
    """Base class for all package errors."""


class NotHermitian(NsresError):
    pass


class NotPSD(NsresError):
    pass


class Singular(NsresError):
    pass


class NoConvergence(NsresError):
    pass


class DimensionMismatch(NsresError):
    pass


class BadMatrix(NsresError):
    """Malformed or non-finite matrix payload."""


class BadSpectralFamily(NsresError):
    """Projections handed to a constructor are not an orthogonal resolution of I."""


class BadResolution(NsresError):
    """A step family violates the resolution-of-the-identity invariants."""


class ComplexAlpha(NsresError):
    pass


class NotDefinite(NsresError):
    pass


class NegativeJump(NsresError):
    pass


class NotMonotone(NsresError):
    pass


class ZeroVector(NsresError):
    pass


class UnknownClaim(NsresError):
    pass
