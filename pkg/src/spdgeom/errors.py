"""Exception types raised across the package."""

import numpy as np


class SpdError(Exception):
    """Base class for all errors raised by spdgeom."""


class NotSymmetric(SpdError, ValueError):
    pass


class NotPositiveDefinite(SpdError, ValueError):
    pass


class DimensionMismatch(SpdError, ValueError):
    pass


class ParseError(SpdError, ValueError):
    pass


class FactorizationFailure(SpdError, np.linalg.LinAlgError):
    pass


class SolveFailure(SpdError, RuntimeError):
    pass


class NonPositiveResult(SpdError, ArithmeticError):
    """A result that should be SPD by construction failed validation."""


class NoConvergence(SpdError, RuntimeError):
    """An iterative method hit its iteration cap.

    Attributes
    ----------
    iterations : int
        Number of iterations (or cycles) performed before giving up.
    residual : float
        Last convergence measure observed.
    """

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual
