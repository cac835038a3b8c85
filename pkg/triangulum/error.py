"""
Error types and process exit codes.
"""

from enum import Enum


class Status(Enum):
    """
    An indication of whether a process is okay or not.
    """
    OKAY = 0
    USAGE = 2
    NUMERICAL = 3

    def __int__(self):
        return int(self.value)
    pass


class TriangulumError(Exception):
    """
    Base class for every failure raised by the package.
    """
    status = Status.NUMERICAL


class InvalidArgument(TriangulumError, ValueError):
    status = Status.USAGE


class TruncationError(TriangulumError):
    """
    A Fock-space state keeps too much weight near its cutoff.
    """

    def __init__(self, message: str, suggested_cutoff: int=None):
        super().__init__(message)
        self.suggested_cutoff = suggested_cutoff


class IntegrationError(TriangulumError):
    pass


class ConstraintViolation(TriangulumError):
    pass


class DegeneratePostselection(TriangulumError):
    pass


class SingularKernel(TriangulumError):
    pass


class NoRoot(TriangulumError):
    pass


class DomainTooSmall(TriangulumError):
    """
    A sampled function is still significant on the edge of its window.

    `grid` holds the rejected samples when they are available.
    """

    def __init__(self, message: str, grid=None):
        super().__init__(message)
        self.grid = grid
