"""Incremental pattern generators: RAND, SOBOL, and GAUSS.

All three produce ordered, duplicate-free point lists whose prefixes are valid
patterns at any lower density.  RAND draws uniformly among unsampled cells.
SOBOL discretizes the two-dimensional Sobol low-discrepancy sequence.  GAUSS
draws from a product distribution that zeroes out already-drawn cells and
suppresses their neighborhoods, pushing new points into void regions.
"""

from dataclasses import dataclass

import numpy as np

from .errors import AlreadySampled, CountTooLarge, SobolExhausted
from .patterns import GridDims, SamplingPattern

# Seedable, platform-independent RNG pinned for reproducibility (golden test
# in the suite).  All randomized generators derive their stream from this.
def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _check_count(dims: GridDims, count: int) -> None:
    if count < 0:
        raise ValueError("count must be non-negative")
    if count > dims.ncells:
        raise CountTooLarge(f"count {count} exceeds grid capacity {dims.ncells}")


def _first_unique(flat: np.ndarray) -> np.ndarray:
    """Indices-preserving deduplication: keep the first occurrence of each value."""
    _, first = np.unique(flat, return_index=True)
    return flat[np.sort(first)]


# --- RAND --------------------------------------------------------------------


def gen_rand(dims: GridDims, count: int, seed: int) -> SamplingPattern:
    """Uniform incremental random pattern; repeated raw draws are bypassed."""
    dims = GridDims(*dims)
    _check_count(dims, count)
    rng = make_rng(seed)
    chosen = np.empty(0, dtype=np.int64)
    seen = np.zeros(dims.ncells, dtype=bool)
    order = []
    while len(chosen) < count:
        batch = rng.integers(0, dims.ncells, size=max(count, 1024))
        fresh = _first_unique(batch)
        fresh = fresh[~seen[fresh]]
        seen[fresh] = True
        order.append(fresh)
        chosen = np.concatenate(order) if len(order) > 1 else fresh
        if len(order) > 1:
            order = [chosen]
    flat = chosen[:count]
    points = np.column_stack((flat % dims.width, flat // dims.width))
    return SamplingPattern(dims, points)


# --- SOBOL -------------------------------------------------------------------
#
# Two-dimensional Sobol sequence in Gray-code (Antonov-Saleev) order.
# Dimension 1 is the van der Corput sequence in base 2 (all m_j = 1).
# Dimension 2 uses the degree-1 primitive polynomial x + 1, whose direction
# integers follow m_j = (2 * m_{j-1}) XOR m_{j-1}:  1, 3, 5, 15, 17, 51, ...

_SOBOL_BITS = 32


def _direction_integers_dim2(nbits: int) -> list[int]:
    m = [1]
    for _ in range(nbits - 1):
        m.append((2 * m[-1]) ^ m[-1])
    return m


def _direction_table() -> np.ndarray:
    """(2, nbits) table of direction numbers scaled to 32-bit integers."""
    v = np.zeros((2, _SOBOL_BITS), dtype=np.uint64)
    m2 = _direction_integers_dim2(_SOBOL_BITS)
    for j in range(_SOBOL_BITS):
        v[0, j] = 1 << (_SOBOL_BITS - 1 - j)
        v[1, j] = m2[j] << (_SOBOL_BITS - 1 - j)
    return v

_SOBOL_V = _direction_table()


def sobol_points(n: int, skip: int = 0) -> np.ndarray:
    """First `n` points of the 2-D Sobol sequence after skipping `skip`.

    Returns an (n, 2) float array in [0, 1)^2.  Element i equals the XOR of
    the direction numbers selected by the Gray code of (skip + i), which
    reproduces the sequential Antonov-Saleev construction exactly.
    """
    idx = np.arange(skip, skip + n, dtype=np.uint64)
    gray = idx ^ (idx >> np.uint64(1))
    acc = np.zeros((n, 2), dtype=np.uint64)
    for j in range(_SOBOL_BITS):
        bit = (gray >> np.uint64(j)) & np.uint64(1)
        mask = bit.astype(bool)
        acc[mask, 0] ^= _SOBOL_V[0, j]
        acc[mask, 1] ^= _SOBOL_V[1, j]
    return acc.astype(np.float64) / float(1 << _SOBOL_BITS)


def _sobol_cells(dims: GridDims, n: int, skip: int) -> np.ndarray:
    """Integer grid cells of the scaled, floored Sobol points (exact arithmetic)."""
    idx = np.arange(skip, skip + n, dtype=np.uint64)
    gray = idx ^ (idx >> np.uint64(1))
    acc = np.zeros((n, 2), dtype=np.uint64)
    for j in range(_SOBOL_BITS):
        mask = ((gray >> np.uint64(j)) & np.uint64(1)).astype(bool)
        acc[mask, 0] ^= _SOBOL_V[0, j]
        acc[mask, 1] ^= _SOBOL_V[1, j]
    # floor(u * W) with u = acc / 2^32, done in integers so no rounding slips
    x = (acc[:, 0] * np.uint64(dims.width)) >> np.uint64(_SOBOL_BITS)
    y = (acc[:, 1] * np.uint64(dims.height)) >> np.uint64(_SOBOL_BITS)
    return np.column_stack((x, y)).astype(np.int64)


def gen_sobol(dims: GridDims, count: int) -> SamplingPattern:
    """Deterministic SOBOL pattern.

    Generates 4*W*H sequence elements after internally skipping the first
    4*W*H, scales to the grid, floors, and bypasses repeated cells.
    """
    dims = GridDims(*dims)
    _check_count(dims, count)
    oversample = 4 * dims.ncells
    cells = _sobol_cells(dims, oversample, skip=oversample)
    flat = _first_unique(cells[:, 1] * dims.width + cells[:, 0])
    if len(flat) < count:
        raise SobolExhausted(
            f"{oversample} Sobol draws yielded only {len(flat)} unique cells, "
            f"need {count}"
        )
    flat = flat[:count]
    points = np.column_stack((flat % dims.width, flat // dims.width))
    return SamplingPattern(dims, points)


# --- GAUSS -------------------------------------------------------------------


@dataclass(frozen=True)
class GaussParams:
    """Tunables of the Gaussian-suppression distribution.

    Each drawn point multiplies the weight of every cell at Euclidean distance
    d by (1 - exp(-d^2 / sigma_scale^2))^tau, which is 0 at the point itself.
    The factor is within 1e-12 of 1 beyond `cutoff_radius`, so the update is
    truncated there.
    """

    tau: float = 7.0
    sigma_scale: float = 2.0
    cutoff_radius: int = 12

    def __post_init__(self):
        if self.tau <= 0 or self.sigma_scale <= 0 or self.cutoff_radius < 1:
            raise ValueError("invalid GaussParams")


class ProbabilityField:
    """Per-cell log-weight grid with a two-level partial-sum index.

    Weights start uniform (log-weight 0 everywhere).  Drawn cells get weight
    exactly 0; neighbors are suppressed by the truncated Gaussian factor,
    accumulated in the log domain.  Row totals are kept alongside the weight
    grid so a weighted draw costs two vectorized prefix scans instead of a
    full-grid cumulative sum.
    """

    def __init__(self, dims: GridDims, params: GaussParams = GaussParams()):
        self.dims = GridDims(*dims)
        self.params = params
        h, w = self.dims.height, self.dims.width
        self.logw = np.zeros((h, w))
        self.weights = np.ones((h, w))
        self.row_sums = np.full(h, float(w))
        r = params.cutoff_radius
        span = np.arange(-r, r + 1, dtype=np.float64)
        d2 = span[:, None] ** 2 + span[None, :] ** 2
        with np.errstate(divide="ignore"):  # center factor is exactly 0 -> -inf
            patch = params.tau * np.log1p(-np.exp(-d2 / params.sigma_scale**2))
        patch[d2 > r * r] = 0.0  # outside the cutoff disc the factor is 1
        self._log_patch = patch

    @property
    def total(self) -> float:
        return float(self.row_sums.sum())

    def check_consistency(self, rtol: float = 1e-9) -> bool:
        return bool(
            np.allclose(self.row_sums, self.weights.sum(axis=1), rtol=rtol, atol=0.0)
        )

    def update(self, x: int, y: int) -> None:
        """Zero the drawn cell and suppress its neighborhood."""
        if np.isneginf(self.logw[y, x]):
            raise AlreadySampled(f"cell ({x}, {y}) was already drawn")
        r = self.params.cutoff_radius
        h, w = self.dims.height, self.dims.width
        y0, y1 = max(0, y - r), min(h, y + r + 1)
        x0, x1 = max(0, x - r), min(w, x + r + 1)
        patch = self._log_patch[y0 - y + r : y1 - y + r, x0 - x + r : x1 - x + r]
        self.logw[y0:y1, x0:x1] += patch
        self.logw[y, x] = -np.inf
        np.exp(self.logw[y0:y1, x0:x1], out=self.weights[y0:y1, x0:x1])
        self.row_sums[y0:y1] = self.weights[y0:y1].sum(axis=1)

    def draw(self, rng: np.random.Generator):
        """One weighted draw; returns (x, y) or None when all mass is gone."""
        total = self.row_sums.sum()
        if total <= 0.0 or not np.isfinite(total):
            return None
        target = rng.random() * total
        crow = np.cumsum(self.row_sums)
        y = int(np.searchsorted(crow, target, side="right"))
        y = min(y, self.dims.height - 1)
        while self.row_sums[y] == 0.0:  # numeric edge: landed on an empty row
            y -= 1
        rem = target - (crow[y - 1] if y > 0 else 0.0)
        ccol = np.cumsum(self.weights[y])
        x = int(np.searchsorted(ccol, rem, side="right"))
        x = min(x, self.dims.width - 1)
        while self.weights[y, x] == 0.0:
            x -= 1
        return x, y


def field_init(dims: GridDims, params: GaussParams = GaussParams()) -> ProbabilityField:
    return ProbabilityField(dims, params)


def gen_gauss(
    dims: GridDims,
    count: int,
    seed: int,
    params: GaussParams = GaussParams(),
) -> SamplingPattern:
    """Incremental pattern drawn from the Gaussian-suppression distribution.

    Once every remaining cell's weight underflows to zero the draw falls back
    to uniform sampling over the unsampled cells, preserving the incremental
    contract up to full density.
    """
    dims = GridDims(*dims)
    _check_count(dims, count)
    rng = make_rng(seed)
    field = ProbabilityField(dims, params)
    points = np.empty((count, 2), dtype=np.int64)
    sampled = np.zeros((dims.height, dims.width), dtype=bool)
    for i in range(count):
        drawn = field.draw(rng)
        if drawn is None:
            # degenerate field: uniform over the remaining unsampled cells
            remaining = np.flatnonzero(~sampled.ravel())
            flat = int(remaining[rng.integers(0, len(remaining))])
            drawn = (flat % dims.width, flat // dims.width)
        x, y = drawn
        points[i] = (x, y)
        sampled[y, x] = True
        field.update(x, y)
    return SamplingPattern(dims, points)
