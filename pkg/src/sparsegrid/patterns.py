"""Incremental sampling patterns: data types, prefixes, and the IMASK file format.

A sampling pattern is an ordered, duplicate-free list of pixel coordinates on a
W x H grid.  The order is the acquisition order, so every prefix of a pattern
is itself a usable pattern at a lower sampling density.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DuplicatePoint, FormatError, InsufficientPoints, OutOfBounds


class GridDims(NamedTuple):
    width: int
    height: int

    @property
    def ncells(self) -> int:
        return self.width * self.height


class SamplingPattern:
    """Ordered, duplicate-free, in-bounds point list on a pixel grid.

    Points are stored as an (n, 2) integer array with columns (x, y).
    Immutable after construction; the acquisition order is part of the
    pattern's identity.
    """

    def __init__(self, dims: GridDims, points):
        dims = GridDims(int(dims[0]), int(dims[1]))
        if dims.width < 1 or dims.height < 1:
            raise ValueError("grid dimensions must be positive")
        pts = np.asarray(points, dtype=np.int64).reshape(-1, 2).copy()
        if pts.size:
            x, y = pts[:, 0], pts[:, 1]
            if (x < 0).any() or (x >= dims.width).any() or (y < 0).any() or (y >= dims.height).any():
                raise OutOfBounds("pattern contains out-of-bounds coordinates")
            flat = y * dims.width + x
            if np.unique(flat).size != flat.size:
                raise DuplicatePoint("pattern contains duplicate coordinates")
        pts.setflags(write=False)
        self.dims = dims
        self.points = pts

    def __len__(self) -> int:
        return self.points.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, SamplingPattern):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self.points, other.points)

    def __repr__(self) -> str:
        return f"SamplingPattern(dims={self.dims}, n={len(self)})"


@dataclass(frozen=True)
class DensityPrefix:
    """The first `count` points of a pattern, i.e. the pattern at some density."""

    pattern: SamplingPattern
    count: int

    @property
    def density(self) -> float:
        return self.count / self.pattern.dims.ncells

    @property
    def points(self) -> np.ndarray:
        return self.pattern.points[: self.count]


def density_to_count(density: float, dims: GridDims) -> int:
    # round half away from zero; 25% on an even grid gives exactly W*H/4
    return int(np.floor(density * dims.ncells + 0.5))


def prefix(pattern: SamplingPattern, density: float) -> DensityPrefix:
    """Take the leading portion of `pattern` at the requested sampling density."""
    if not 0.0 < density <= 1.0:
        raise ValueError("density must be in (0, 1]")
    n = density_to_count(density, pattern.dims)
    if n > len(pattern):
        raise InsufficientPoints(
            f"pattern has {len(pattern)} points, density {density} needs {n}"
        )
    return DensityPrefix(pattern, n)


def to_bitmap(pfx: DensityPrefix) -> np.ndarray:
    """Boolean H x W raster with True exactly at the prefix coordinates."""
    dims = pfx.pattern.dims
    bitmap = np.zeros((dims.height, dims.width), dtype=bool)
    pts = pfx.points
    bitmap[pts[:, 1], pts[:, 0]] = True
    return bitmap


# --- IMASK text format -------------------------------------------------------
#
# line 1: "IMASK 1"
# line 2: "<width> <height> <count>"
# then one "<x> <y>" line per point, in acquisition order; "\n" line ends,
# no trailing whitespace.


def serialize(pattern: SamplingPattern) -> bytes:
    lines = ["IMASK 1", f"{pattern.dims.width} {pattern.dims.height} {len(pattern)}"]
    lines.extend(f"{x} {y}" for x, y in pattern.points)
    return ("\n".join(lines) + "\n").encode("ascii")


def parse(data: bytes) -> SamplingPattern:
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError as e:
        raise FormatError(f"not an ASCII IMASK file: {e}") from None
    if not text.endswith("\n"):
        raise FormatError("missing trailing newline")
    lines = text[:-1].split("\n")
    if not lines or lines[0] != "IMASK 1":
        raise FormatError("line 1: expected 'IMASK 1'")
    if len(lines) < 2:
        raise FormatError("line 2: missing header")
    header = lines[1].split(" ")
    if len(header) != 3:
        raise FormatError("line 2: expected '<width> <height> <count>'")
    try:
        width, height, count = (int(v) for v in header)
    except ValueError:
        raise FormatError("line 2: non-integer header field") from None
    if width < 1 or height < 1 or count < 0:
        raise FormatError("line 2: invalid dimensions or count")
    if len(lines) - 2 != count:
        raise FormatError(
            f"header declares {count} points but file holds {len(lines) - 2}"
        )
    points = np.empty((count, 2), dtype=np.int64)
    for i, line in enumerate(lines[2:]):
        parts = line.split(" ")
        if len(parts) != 2:
            raise FormatError(f"line {i + 3}: expected '<x> <y>'")
        try:
            points[i, 0] = int(parts[0])
            points[i, 1] = int(parts[1])
        except ValueError:
            raise FormatError(f"line {i + 3}: non-integer coordinate") from None
    return SamplingPattern(GridDims(width, height), points)
