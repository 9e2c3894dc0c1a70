"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument violates a documented precondition."""


class OutOfRangeError(ValueError):
    """A value lies outside the range of the function being inverted."""


class UnsupportedOperationError(ValueError):
    """The operation needs a strictly convex or strictly concave map."""


class InvalidReparametrizationError(ValueError):
    """A map fails the admissibility checks (endpoints, positivity, curvature sign)."""


class InvalidPairError(ValueError):
    """Two maps do not satisfy the hypotheses of the ordering construction."""


class NumericalError(ArithmeticError):
    """A factorization or solver step produced an impossible result."""

    def __init__(self, message: str, pivot: int | None = None):
        super().__init__(message)
        self.pivot = pivot
