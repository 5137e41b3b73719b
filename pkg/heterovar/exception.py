"""Module with custom exceptions."""


class HeterovarBaseException(Exception):
    """Base exception for package-related errors.

    Attributes:
        payload (dict): Additional data of error context.

    """

    def __init__(self, message, payload=None):
        if payload is None:
            payload = {}
        super().__init__(message)
        self.payload = payload


class InvalidConfiguration(HeterovarBaseException):
    """Called when bandwidth, kernel or experiment settings are out of range."""


class InvalidInput(HeterovarBaseException):
    """Called when supplied data (sample, grid, truth vector) is malformed."""


class BandwidthTooSmall(HeterovarBaseException):
    """Called when a local fit has too few weighted points to be solved."""


class InsufficientPoints(HeterovarBaseException):
    """Called when a slope or a selection has too few usable points."""


class UnsupportedMean(HeterovarBaseException):
    """Called when a custom mean function has no usable derivative."""


class NumericToleranceError(HeterovarBaseException):
    """Called when quadrature can't reach the requested tolerance."""
