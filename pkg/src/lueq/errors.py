"""Exception hierarchy shared by all modules."""


class LUEqError(Exception):
    """Base class for errors raised by this package."""


class ShapeMismatch(LUEqError, ValueError):
    pass


class DimsMismatch(ShapeMismatch):
    pass


class NotFinite(LUEqError, ValueError):
    pass


class NotHermitian(LUEqError, ValueError):
    pass


class NoConvergence(LUEqError, ArithmeticError):
    pass


class NotOrthonormal(LUEqError, ValueError):
    pass


class RankDeficient(LUEqError, ArithmeticError):
    pass


class NotNormalized(LUEqError, ValueError):
    pass


class InvalidParams(LUEqError, ValueError):
    pass


class InvalidRank(InvalidParams):
    pass


class StateValidationError(LUEqError, ValueError):
    """A matrix failed one of the density-matrix invariants.

    ``invariant`` names the violated property and ``violation`` is the
    measured amount (a norm, a trace deviation, or the smallest eigenvalue).
    """

    invariant = "DensityMatrix"

    def __init__(self, message, violation=float("nan")):
        super().__init__(message)
        self.violation = float(violation)


class NotHermitianState(StateValidationError, NotHermitian):
    invariant = "NotHermitian"


class TraceNotOne(StateValidationError):
    invariant = "TraceNotOne"


class NotPositiveSemidefinite(StateValidationError):
    invariant = "NotPositiveSemidefinite"


class NeedsFallback(LUEqError):
    """Raised by the closed-form aligner when a degenerate stratum is hit.

    Not an error for callers of ``decide_equivalence``: it routes the pair to
    the optimizer.
    """
