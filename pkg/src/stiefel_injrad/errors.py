"""Exception hierarchy shared by all modules."""


class StiefelError(Exception):
    """Base class for numerical failures raised by this package."""


class DimensionMismatch(StiefelError, ValueError):
    pass


class RankDeficient(StiefelError):
    pass


class NotSpecialOrthogonal(StiefelError):
    pass


class LogBranchBoundary(StiefelError):
    """An eigenvalue sits at (or too close to) -1, so the principal log is ill-defined."""


class NoConvergence(StiefelError):
    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class UnreachableRank(StiefelError, ValueError):
    pass


class DimensionTooSmall(StiefelError, ValueError):
    pass


class DegeneratePlane(StiefelError):
    pass


class NoSignChange(StiefelError):
    pass
