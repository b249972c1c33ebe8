"""
Exception hierarchy shared by every module.

Validation failures derive from ``ValueError`` and numerical failures from
``RuntimeError`` so callers that only know the built-in types keep working.
"""

from typing import Optional


class PlmmError(Exception):
    """
    Base class for all errors raised by plmmcv.
    """

    exit_code: int = 1


class DataValidationError(PlmmError, ValueError):
    """
    Raised when inputs (files, matrices, configs) violate a precondition.
    """

    exit_code = 2


class NumericalError(PlmmError, RuntimeError):
    """
    Raised when a numerical routine fails on otherwise valid input.
    """

    exit_code = 3


class DecompositionError(NumericalError):
    """
    Raised when the eigendecomposition of the kinship fails or is not PSD.
    """


class ConvergenceError(NumericalError):
    """
    Raised when coordinate descent does not converge within max_iter sweeps.

    Attributes:
        lam (Optional[float]): The penalty value at which the solver gave up.
    """

    def __init__(self, message: str, lam: Optional[float] = None):
        super().__init__(message)
        self.lam = lam
