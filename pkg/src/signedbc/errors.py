"""Exception types raised across the package."""


class SignedBCError(Exception):
    """Base class for all package errors."""


class IndexOutOfRange(SignedBCError, IndexError):
    pass


class ConflictingEdgeSign(SignedBCError, ValueError):
    pass


class SelfLoopRejected(SignedBCError, ValueError):
    pass


class InvalidEdgeSign(SignedBCError, ValueError):
    pass


class InvalidProbability(SignedBCError, ValueError):
    pass


class InvalidGroupCount(SignedBCError, ValueError):
    pass


class DimensionMismatch(SignedBCError, ValueError):
    pass


class NegativeEdgePresent(SignedBCError, ValueError):
    pass


class InvalidParameter(SignedBCError, ValueError):
    pass


class DegenerateInitialState(SignedBCError, ValueError):
    pass


class SingleGroup(SignedBCError, ValueError):
    pass


class ZeroOutGroupDistance(SignedBCError, ValueError):
    pass


class UnknownParameter(SignedBCError, KeyError):
    pass


class GraphFormatError(SignedBCError, ValueError):
    pass


class IoFailure(SignedBCError, OSError):
    pass
