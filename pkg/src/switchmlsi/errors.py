"""Exception hierarchy shared by all modules."""


class MLSIError(Exception):
    """Base class for errors raised by this package."""


class ChainError(MLSIError, ValueError):
    pass


class NotReversible(ChainError):
    pass


class NotIrreducible(ChainError):
    pass


class BadMeasure(ChainError):
    pass


class DimensionMismatch(MLSIError, ValueError):
    pass


class NonPositiveFunction(MLSIError, ValueError):
    pass


class GridTooCoarse(MLSIError):
    pass


class DegenerateMass(MLSIError, ValueError):
    pass


class PreconditionViolated(MLSIError, ValueError):
    pass


class PathNotInSourceGraph(MLSIError, ValueError):
    pass


class RatioOutOfRange(MLSIError, ValueError):
    pass


class SpaceTooLarge(MLSIError):
    """The requested state space exceeds the configured enumeration cap."""


class NotInCategory(MLSIError, ValueError):
    pass


class NotAdjacent(MLSIError, ValueError):
    pass


class SwitchingInvalidOnEndpoint(MLSIError):
    pass


class MembershipViolated(MLSIError, ValueError):
    pass


class InvalidStart(MLSIError, ValueError):
    pass
