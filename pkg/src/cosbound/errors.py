"""Exception types shared across the package."""


class CosboundError(Exception):
    """Base class for all errors raised by this package."""


class ZeroVector(CosboundError):
    """A vector with zero norm was given where a direction is required."""


class NonFinite(CosboundError):
    """A vector component is NaN or infinite."""


class DimensionMismatch(CosboundError):
    """Operands have incompatible shapes or representation families."""


class DomainError(CosboundError):
    """A similarity argument lies outside [-1, 1]."""


class EmptyDataset(CosboundError):
    """An index build or query was attempted on an empty dataset."""


class BadK(CosboundError):
    """k is outside 1..n for a k-nearest-neighbor query."""


class BadPivotCount(CosboundError):
    """Pivot count is outside 1..n for a pivot table build."""


class DataFormatError(CosboundError):
    """An input file could not be parsed; the message cites file and line."""


class ChecksumMismatch(CosboundError):
    """A persisted index failed its dataset checksum verification."""
