"""Exception hierarchy shared by every hamsym module."""

from __future__ import annotations


class HamsymError(Exception):
    """Base class for all errors raised by hamsym."""


class ParseError(HamsymError, ValueError):
    def __init__(self, message: str, position: int | None = None, text: str | None = None):
        self.position = position
        self.text = text
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class UnknownIdentifierError(ParseError):
    def __init__(self, name: str, position: int | None = None, text: str | None = None):
        self.name = name
        super().__init__(f"unknown identifier {name!r}", position, text)


class DomainError(HamsymError, ArithmeticError):
    """Expression evaluated outside its domain (zero divisor, log of non-positive...)."""

    def __init__(self, message: str, point=None):
        self.point = None if point is None else tuple(float(v) for v in point)
        if self.point is not None:
            message = f"{message} at point {self.point}"
        super().__init__(message)


class SamplingExhaustedError(HamsymError):
    pass


class UnsupportedGeometryError(HamsymError, ValueError):
    pass


class NoReebError(UnsupportedGeometryError):
    pass


class DegenerateHamiltonianError(HamsymError):
    pass


class IntegrationPathError(HamsymError):
    pass
