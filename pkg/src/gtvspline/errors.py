"""Exception types raised across the package."""


class GTVError(Exception):
    """Base class for all errors raised by :mod:`gtvspline`."""


class IdentityHasNoGreenFunction(GTVError):
    pass


class GridTooShort(GTVError):
    pass


class UnsupportedOperator(GTVError):
    pass


class NullspaceNotIdentifiable(GTVError):
    """No invertible N0 x N0 submatrix of the cross-product matrix exists."""


class SingularNormalEquations(GTVError):
    pass


class DimensionMismatch(GTVError):
    pass


class InadmissibleFunctional(GTVError):
    """The functional cannot be paired with atoms of the given operator."""


class QuadratureFailure(GTVError):
    pass


class IllPosedNullspace(GTVError):
    pass


class InfeasibleProblem(GTVError):
    pass


class CyclingDetected(GTVError):
    pass


class MaxIterReached(GTVError):
    pass


class BracketFailure(GTVError):
    pass


class TooLarge(GTVError):
    pass
