"""Uniformity measurement and Metropolis pattern optimization.

The deviation of a point set S inside an axis-aligned rectangle B is

    delta_B = | |S n B| / |S|  -  area(B) |

with half-open membership [u0,u1) x [v0,v1).  The supremum of delta_B over
all rectangles is the (normalized) discrepancy.  `estimate_discrepancy`
estimates it by Monte-Carlo rectangle sampling; `exact_discrepancy` computes
the exact supremum for small sets by enumerating critical rectangles; the
mean absolute deviation over random rectangles doubles as the "randomness
measure" driving the Metropolis swap optimizer.
"""

from dataclasses import dataclass

import numpy as np

from .errors import EmptyPointSet, InvalidSchedule, TooManyPoints
from .generators import make_rng
from .patterns import DensityPrefix, SamplingPattern


def to_unit_points(pfx: DensityPrefix) -> np.ndarray:
    """Map grid cells to cell centers in the unit square: ((x+.5)/W, (y+.5)/H)."""
    dims = pfx.pattern.dims
    pts = pfx.points.astype(np.float64)
    return np.column_stack(((pts[:, 0] + 0.5) / dims.width, (pts[:, 1] + 0.5) / dims.height))


@dataclass(frozen=True)
class DiscrepancyReport:
    sup_estimate: float
    mean_abs_deviation: float
    rectangles_tested: int
    seed: int


def _random_rects(m: int, rng: np.random.Generator) -> tuple[np.ndarray, ...]:
    u = np.sort(rng.random((m, 2)), axis=1)
    v = np.sort(rng.random((m, 2)), axis=1)
    return u[:, 0], u[:, 1], v[:, 0], v[:, 1]


def _deviations(points: np.ndarray, u0, u1, v0, v1, chunk: int = 4096) -> np.ndarray:
    """delta_B for every rectangle, vectorized in chunks to bound memory."""
    n = len(points)
    u = points[:, 0]
    v = points[:, 1]
    out = np.empty(len(u0))
    for lo in range(0, len(u0), chunk):
        hi = min(lo + chunk, len(u0))
        inside = (
            (u >= u0[lo:hi, None])
            & (u < u1[lo:hi, None])
            & (v >= v0[lo:hi, None])
            & (v < v1[lo:hi, None])
        )
        frac = inside.sum(axis=1) / n
        area = (u1[lo:hi] - u0[lo:hi]) * (v1[lo:hi] - v0[lo:hi])
        out[lo:hi] = np.abs(frac - area)
    return out


def _refined_devs(points, u0, u1, v0, v1, chunk: int = 512) -> np.ndarray:
    """Locally optimized deviation for each sampled rectangle.

    Each rectangle is snapped onto the two critical boxes it brackets:

    * shrink: the closed bounding box of the points it contains (maximizes
      count/n - area for that subset);
    * grow: edges pushed outward to just before the nearest excluded point or
      the domain boundary (maximizes area - count/n for that subset).

    Both are limits of genuine rectangles, so the refined supremum never
    exceeds the exact discrepancy.
    """
    n = len(points)
    u = points[:, 0]
    v = points[:, 1]
    out = np.empty(len(u0))
    for lo in range(0, len(u0), chunk):
        hi = min(lo + chunk, len(u0))
        a0, a1 = u0[lo:hi, None], u1[lo:hi, None]
        b0, b1 = v0[lo:hi, None], v1[lo:hi, None]
        inside = (u >= a0) & (u < a1) & (v >= b0) & (v < b1)
        cnt = inside.sum(axis=1)
        frac = cnt / n
        # shrink to the closed bounding box of the captured subset
        minu = np.where(inside, u, np.inf).min(axis=1)
        maxu = np.where(inside, u, -np.inf).max(axis=1)
        minv = np.where(inside, v, np.inf).min(axis=1)
        maxv = np.where(inside, v, -np.inf).max(axis=1)
        has = cnt > 0
        shrink = np.where(
            has,
            frac - np.maximum(maxu - minu, 0.0) * np.maximum(maxv - minv, 0.0),
            0.0,
        )
        # grow edges outward without capturing new points: first the u edges
        # against points in the v slab, then the v edges against the widened
        # u slab
        in_vslab = (v >= b0) & (v < b1)
        # -1 sentinel: no excluded point on that side, edge rests on the
        # domain boundary and points at coordinate 0 stay included
        left = np.where(in_vslab & (u < a0), u, -1.0).max(axis=1)[:, None]
        right = np.where(in_vslab & (u >= a1), u, 1.0).min(axis=1)[:, None]
        in_uslab = (u > left) & (u < right)
        down = np.where(in_uslab & (v < b0), v, -1.0).max(axis=1)
        up = np.where(in_uslab & (v >= b1), v, 1.0).min(axis=1)
        area = (right[:, 0] - np.maximum(left[:, 0], 0.0)) * (up - np.maximum(down, 0.0))
        grow = np.where(area < 1.0, area - frac, 0.0)
        out[lo:hi] = np.maximum(shrink, grow)
    return out


def estimate_discrepancy(
    points: np.ndarray, m: int, seed: int, refine: bool = True
) -> DiscrepancyReport:
    """Monte-Carlo discrepancy estimate over `m` uniform random rectangles.

    The mean absolute deviation (the Li-style randomness measure) is taken
    over the raw uniform rectangles.  For the supremum estimate each raw
    rectangle is additionally snapped onto the critical boxes it brackets
    (see `_refined_devs`); without this refinement a blind uniform search
    would need orders of magnitude more rectangles to approach the supremum.
    """
    points = np.asarray(points, dtype=np.float64)
    if len(points) == 0:
        raise EmptyPointSet("cannot estimate discrepancy of an empty point set")
    if m < 1:
        raise ValueError("rectangle count must be >= 1")
    rng = make_rng(seed)
    rects = _random_rects(m, rng)
    dev = _deviations(points, *rects)
    sup = float(dev.max())
    if refine:
        sup = max(sup, float(_refined_devs(points, *rects).max()))
    return DiscrepancyReport(
        sup_estimate=sup,
        mean_abs_deviation=float(dev.mean()),
        rectangles_tested=m,
        seed=seed,
    )


def exact_discrepancy(points: np.ndarray) -> float:
    """Exact supremum of delta_B, for |S| <= 256.

    Two families of critical rectangles realize the supremum in the limit:

    * count-rich: the closed bounding box of any subset of points selected by
      a coordinate range, shrunk onto the extreme points (area is the closed
      box, count includes its boundary);
    * area-rich: boxes whose edges push outward to just before the next point
      (or the domain boundary), so boundary points are excluded.

    Both families have edges in rank space, so a 2-D prefix-count table gives
    every count in O(1).
    """
    points = np.asarray(points, dtype=np.float64)
    n = len(points)
    if n == 0:
        return 0.0
    if n > 256:
        raise TooManyPoints(f"exact oracle limited to 256 points, got {n}")
    xs = np.unique(points[:, 0])
    ys = np.unique(points[:, 1])
    nx, ny = len(xs), len(ys)
    # prefix[i, j] = number of points with u <= xs[i-1] and v <= ys[j-1]
    xi = np.searchsorted(xs, points[:, 0])
    yi = np.searchsorted(ys, points[:, 1])
    counts = np.zeros((nx + 1, ny + 1), dtype=np.int64)
    np.add.at(counts, (xi + 1, yi + 1), 1)
    prefix = counts.cumsum(axis=0).cumsum(axis=1)

    def closed_count(a, b, c, d):
        # points with xs[a] <= u <= xs[b], ys[c] <= v <= ys[d]  (rank indices)
        return prefix[b + 1, d + 1] - prefix[a, d + 1] - prefix[b + 1, c] + prefix[a, c]

    best = 0.0

    # count-rich: closed boxes over all rank pairs (a <= b) x (c <= d)
    a, b = np.triu_indices(nx)
    c, d = np.triu_indices(ny)
    wx = xs[b] - xs[a]
    wy = ys[d] - ys[c]
    cnt = (
        prefix[b + 1][:, d + 1] - prefix[a][:, d + 1] - prefix[b + 1][:, c] + prefix[a][:, c]
    )
    dev = cnt / n - wx[:, None] * wy[None, :]
    best = max(best, float(dev.max()))

    # area-rich: lo edge at the domain start or just past a point coordinate,
    # hi edge at a point coordinate (excluded, half-open) or the domain end.
    # Edge index i on the lo side selects x-ranks >= i; index j on the hi side
    # selects x-ranks < j, so the interior count is a prefix-table difference.
    def edge_pairs(coords, ncoords):
        lo_val = np.concatenate(([0.0], coords))
        hi_val = np.concatenate((coords, [1.0]))
        i, j = np.meshgrid(np.arange(ncoords + 1), np.arange(ncoords + 1), indexing="ij")
        width = hi_val[j] - lo_val[i]
        keep = width > 0
        return i[keep], j[keep], width[keep]

    pi_, pj_, wx2 = edge_pairs(xs, nx)
    qm_, qn_, wy2 = edge_pairs(ys, ny)
    chunk = max(1, int(4e6 // max(len(qm_), 1)))
    for lo in range(0, len(pi_), chunk):
        hi = lo + chunk
        i, j, w = pi_[lo:hi], pj_[lo:hi], wx2[lo:hi]
        cnt_open = (
            prefix[j][:, qn_] - prefix[i][:, qn_] - prefix[j][:, qm_] + prefix[i][:, qm_]
        )
        area = w[:, None] * wy2[None, :]
        dev2 = area - cnt_open / n
        dev2[area >= 1.0] = -np.inf  # rectangles must have area < 1
        val = float(dev2.max())
        if val > best:
            best = val
    return best


def metropolis_optimize(
    pattern: SamplingPattern,
    density: float,
    steps: int,
    t0: float | None = None,
    cooling: float = 0.999,
    m: int = 1000,
    seed: int = 0,
) -> tuple[SamplingPattern, dict]:
    """Swap-based Metropolis optimizer of the randomness measure.

    Repeatedly proposes exchanging one sampled cell with one unsampled cell;
    improvements are always accepted, deteriorations with probability
    exp(-delta / T) under geometric cooling.  The energy is the mean absolute
    deviation over a rectangle set frozen per run, so deltas are noise-free.
    Returns the best-seen pattern and a metadata dict; the output pattern is
    NOT incremental (acquisition order is lost), flagged via metadata.
    """
    from .patterns import prefix as take_prefix

    if steps < 0:
        raise InvalidSchedule("steps must be >= 0")
    if not 0.0 < cooling <= 1.0:
        raise InvalidSchedule("cooling factor must be in (0, 1]")
    dims = pattern.dims
    pfx = take_prefix(pattern, density)
    n = pfx.count
    rng = make_rng(seed)
    u0, u1, v0, v1 = _random_rects(m, rng)

    def unit(xy_flat: np.ndarray) -> np.ndarray:
        x = (xy_flat % dims.width + 0.5) / dims.width
        y = (xy_flat // dims.width + 0.5) / dims.height
        return np.column_stack((x, y))

    def membership(pts_unit: np.ndarray) -> np.ndarray:
        # (m,) count of points per frozen rectangle
        inside = (
            (pts_unit[:, 0][None, :] >= u0[:, None])
            & (pts_unit[:, 0][None, :] < u1[:, None])
            & (pts_unit[:, 1][None, :] >= v0[:, None])
            & (pts_unit[:, 1][None, :] < v1[:, None])
        )
        return inside.sum(axis=1)

    areas = (u1 - u0) * (v1 - v0)
    sampled_flat = (pfx.points[:, 1] * dims.width + pfx.points[:, 0]).copy()
    in_mask = np.zeros(dims.ncells, dtype=bool)
    in_mask[sampled_flat] = True
    free_flat = np.flatnonzero(~in_mask)
    counts = membership(unit(sampled_flat)).astype(np.int64)

    def energy(cnt: np.ndarray) -> float:
        return float(np.abs(cnt / n - areas).mean())

    def point_rect_mask(flat: int) -> np.ndarray:
        x = (flat % dims.width + 0.5) / dims.width
        y = (flat // dims.width + 0.5) / dims.height
        return (x >= u0) & (x < u1) & (y >= v0) & (y < v1)

    e = energy(counts)
    if t0 is None:
        t0 = e if e > 0 else 1.0
    temp = t0
    best_e = e
    best_flat = sampled_flat.copy()
    start_e = e
    for _ in range(steps):
        si = int(rng.integers(0, n))
        fi = int(rng.integers(0, len(free_flat)))
        old = int(sampled_flat[si])
        new = int(free_flat[fi])
        cand = counts - point_rect_mask(old) + point_rect_mask(new)
        e_cand = energy(cand)
        accept = e_cand <= e or rng.random() < np.exp(-(e_cand - e) / max(temp, 1e-300))
        if accept:
            sampled_flat[si] = new
            free_flat[fi] = old
            counts = cand
            e = e_cand
            if e < best_e:
                best_e = e
                best_flat = sampled_flat.copy()
        temp *= cooling
    points = np.column_stack((best_flat % dims.width, best_flat // dims.width))
    meta = {
        "incremental": False,
        "start_measure": start_e,
        "best_measure": best_e,
        "steps": steps,
        "rectangles": m,
        "seed": seed,
    }
    return SamplingPattern(dims, points), meta
