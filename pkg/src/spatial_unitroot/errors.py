"""Exception types shared across the package."""

import numpy as np


class InvalidArgumentError(ValueError):
    """An argument violates an operation's precondition."""


class UnsupportedRegimeError(ValueError):
    """Asymptotic quantities requested outside the regime where they exist."""


class SingularSystemError(ArithmeticError):
    """The 2x2 normal-equation matrix failed the determinant guard."""

    def __init__(self, matrix, message=None):
        self.matrix = np.array(matrix, dtype=float)
        if message is None:
            message = f"normal-equation matrix is singular: {self.matrix.tolist()}"
        super().__init__(message)
