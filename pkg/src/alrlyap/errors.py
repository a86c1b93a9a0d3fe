"""Exception types shared across the package."""


class UnstableProjection(ArithmeticError):
    """A projected (small) matrix has an eigenvalue with non-negative real part."""

    def __init__(self, message, eigenvalues=None):
        super().__init__(message)
        self.eigenvalues = eigenvalues


class SingularShift(ArithmeticError):
    """``A + s*I`` is singular (or numerically so) for the requested shift."""

    def __init__(self, message, shift=None):
        super().__init__(message)
        self.shift = shift
