"""Exception hierarchy for the sparsegrid toolkit."""


class SparseGridError(Exception):
    """Base class for all toolkit errors."""


# pattern / mask errors
class InsufficientPoints(SparseGridError):
    pass


class DuplicatePoint(SparseGridError):
    pass


class OutOfBounds(SparseGridError):
    pass


class FormatError(SparseGridError):
    pass


# generator errors
class CountTooLarge(SparseGridError):
    pass


class SobolExhausted(SparseGridError):
    pass


class AlreadySampled(SparseGridError):
    pass


class DegenerateField(SparseGridError):
    pass


# discrepancy errors
class EmptyPointSet(SparseGridError):
    pass


class TooManyPoints(SparseGridError):
    pass


class InvalidSchedule(SparseGridError):
    pass


# reconstruction errors
class DegenerateGeometry(SparseGridError):
    pass


class InvalidParams(SparseGridError):
    pass


# metrics errors
class DimsMismatch(SparseGridError):
    pass


class EmptySet(SparseGridError):
    pass


class InfiniteEntry(SparseGridError):
    pass


# raster I/O errors
class UnsupportedFormat(SparseGridError):
    pass


class CorruptHeader(SparseGridError):
    pass


class CropTooLarge(SparseGridError):
    pass
