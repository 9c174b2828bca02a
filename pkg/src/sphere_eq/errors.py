"""Exception types raised by the library."""


class SphereEqError(Exception):
    """Base class for all library errors."""


class InvalidParameter(SphereEqError, ValueError):
    pass


class InvalidConfiguration(SphereEqError, ValueError):
    """Raised when points are not unit vectors (beyond the renormalization band)."""


class DegeneratePair(SphereEqError, ArithmeticError):
    """Two points coincide while the potential is singular at t = 1."""


class AmbiguousZero(SphereEqError, ArithmeticError):
    """A centroid component sits inside the guard band [tol, 10 tol)."""


class PoleCollision(SphereEqError, ArithmeticError):
    """Some alpha_i equals lambda_k to working precision."""


class NotNormalized(SphereEqError, ValueError):
    """Configuration columns are not orthogonal."""


class RootFindingFailure(SphereEqError, ArithmeticError):
    pass


class InadmissibleSelection(SphereEqError, ValueError):
    pass


class DenominatorVanish(SphereEqError, ArithmeticError):
    def __init__(self, expression, value):
        super().__init__(f"denominator {expression} vanishes (|value| = {abs(value):.3e})")
        self.expression = expression
        self.value = value


class ZeroProduct(SphereEqError, ArithmeticError):
    pass


class DegenerateLeadingCoefficient(SphereEqError, ValueError):
    pass


class NoConvergence(SphereEqError, RuntimeError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
