"""Exception hierarchy used across the package."""


class ClusteringError(Exception):
    """Base class for all errors raised by this package."""


class ContractViolationError(ClusteringError, ValueError):
    """An argument breaks a documented precondition (shape/dimension mismatch)."""


class EmptyClusterError(ClusteringError):
    """A centroid was requested for an empty point collection."""


class InsufficientDataError(ClusteringError):
    """The operation needs more samples than the dataset provides (e.g. n < 2)."""


class DegenerateDataError(ClusteringError):
    """The dataset has fewer distinct points than requested centers."""


class RegimeNotAllowedError(ClusteringError):
    """An explicitly requested execution regime is outside the allowed set for this n."""


class DeviceUnavailableError(ClusteringError):
    """An accelerator device was requested but none is present."""


class DeviceLostError(ClusteringError):
    """The device became unusable mid-run."""


class CapacityExceededError(ClusteringError):
    """A device job does not fit the device's buffer capability; split it."""


class UnknownTicketError(ClusteringError):
    """collect() was called with a ticket this device never issued."""


class DoubleCollectError(ClusteringError):
    """collect() was called twice for the same ticket."""


class ValidationFailureError(ClusteringError):
    """A device job carried inconsistent inputs (e.g. a label out of range)."""


class DataFormatError(ClusteringError):
    """Base class for dataset ingestion problems; carries a 1-based row number."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class ParseError(DataFormatError):
    """A field could not be parsed as a number."""


class NonFiniteValueError(DataFormatError):
    """A parsed field is NaN or infinite."""


class RaggedRowsError(DataFormatError):
    """A row has a different column count than the first row."""


class OutputMismatchError(ClusteringError):
    """Benchmark runs that must agree produced different labels."""
