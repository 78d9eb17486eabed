"""Exception hierarchy shared by the solver modules."""


class GelfandError(Exception):
    """Base class for all errors raised by this package."""


class InvalidDimension(GelfandError, ValueError):
    pass


class MeshTooCoarse(GelfandError, ValueError):
    pass


class LengthMismatch(GelfandError, ValueError):
    pass


class MeshMismatch(GelfandError, ValueError):
    pass


class InvalidParameter(GelfandError, ValueError):
    pass


class SingularMatrix(GelfandError, ArithmeticError):
    pass


class SingularJacobian(SingularMatrix):
    """Newton matrix is numerically singular; usually means we sit at the fold."""


class NoConvergence(GelfandError, ArithmeticError):
    pass


class NonPositiveEigenvector(GelfandError, ArithmeticError):
    pass


class Diverged(GelfandError, ArithmeticError):
    """Monotone iteration blew through the cap or the iteration budget."""

    def __init__(self, message, last_sup_norm, iterations):
        super().__init__(message)
        self.last_sup_norm = last_sup_norm
        self.iterations = iterations


class NotMonotone(GelfandError, ArithmeticError):
    pass


class WrongOrdering(GelfandError, ValueError):
    pass


class EmptyWindow(GelfandError, ValueError):
    pass


class InvalidT(GelfandError, ValueError):
    pass


class NonpositiveE(GelfandError, ValueError):
    pass


class CapTooLow(GelfandError, ArithmeticError):
    pass


class MismatchedParams(GelfandError, ValueError):
    pass
