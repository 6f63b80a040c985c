"""Exception and warning classes raised across weilkit."""


class WeilkitError(ValueError):
    """Base class for all weilkit errors."""


class DimensionError(WeilkitError):
    pass


class SingularMatrixError(WeilkitError):
    pass


class SymmetryError(WeilkitError):
    """Input that must be symmetric deviates from symmetry beyond 1e-8."""


class NotSymplecticError(WeilkitError):
    pass


class NotInSiegelError(WeilkitError):
    """Imaginary part of a matrix is not positive definite."""


class NearSingularCocycleError(WeilkitError):
    pass


class ContinuationError(WeilkitError):
    pass


class BoundaryCausticError(WeilkitError):
    pass


class SingularCError(WeilkitError):
    pass


class FactorizationError(WeilkitError):
    pass


class StepError(WeilkitError):
    pass


class TailError(WeilkitError):
    pass


class SingularFocalPointError(WeilkitError):
    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class IntegratorError(WeilkitError):
    pass


class TruncationWarning(UserWarning):
    """Grid samples do not decay to the box boundary."""
