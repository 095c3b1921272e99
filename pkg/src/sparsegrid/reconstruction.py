"""Image reconstruction from non-regularly sampled measurements.

Two reconstructors operate on a `SampledImage` (value raster + boolean
acquisition mask):

* `lin_reconstruct` - piecewise-linear interpolation over the Delaunay
  triangulation of the sampled positions, nearest-neighbor fill outside the
  convex hull.
* `fsr_reconstruct` - block-wise frequency-selective reconstruction: each
  B x B block is extrapolated from its centered window by greedily picking
  Fourier basis functions that maximize the weighted residual energy
  reduction.  Reconstructed pixels carry zero weight, so blocks are fully
  independent and may be processed in any order or in parallel.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay, cKDTree

from .errors import DegenerateGeometry, DimsMismatch, InvalidParams


@dataclass(frozen=True)
class SampledImage:
    """Value raster (defined where mask is True) plus acquisition bitmap."""

    values: np.ndarray  # (H, W) float
    mask: np.ndarray    # (H, W) bool

    def __post_init__(self):
        if self.values.shape != self.mask.shape:
            raise DimsMismatch("values and mask shapes differ")


# --- linear interpolation (LIN) ---------------------------------------------


class LinearReconstructor:
    """Precomputed interpolation geometry for one mask, reusable across images.

    Triangulates the sampled positions once; each pixel inside the convex hull
    stores its simplex vertices and barycentric weights, each pixel outside
    stores its nearest sampled neighbor.
    """

    def __init__(self, mask: np.ndarray):
        h, w = mask.shape
        ys, xs = np.nonzero(mask)
        if len(xs) < 3:
            raise DegenerateGeometry("need at least 3 sampled points")
        pts = np.column_stack((xs, ys)).astype(np.float64)
        try:
            tri = Delaunay(pts)
        except Exception as e:
            raise DegenerateGeometry(f"triangulation failed: {e}") from None
        if tri.nsimplex == 0:
            raise DegenerateGeometry("all sampled points are collinear")
        gx, gy = np.meshgrid(np.arange(w), np.arange(h))
        grid = np.column_stack((gx.ravel(), gy.ravel())).astype(np.float64)
        simplex = tri.find_simplex(grid)
        inside = simplex >= 0
        # barycentric coordinates for interior pixels
        t = tri.transform[simplex[inside]]
        delta = grid[inside] - t[:, 2]
        bary = np.einsum("nij,nj->ni", t[:, :2], delta)
        self._weights = np.concatenate((bary, 1.0 - bary.sum(axis=1, keepdims=True)), axis=1)
        self._vertices = tri.simplices[simplex[inside]]
        self._inside = inside
        tree = cKDTree(pts)
        _, nearest = tree.query(grid[~inside])
        self._nearest = nearest
        self._sample_idx = (ys, xs)
        self._shape = (h, w)
        self._mask = mask

    def __call__(self, values: np.ndarray) -> np.ndarray:
        if values.shape != self._shape:
            raise DimsMismatch("image shape differs from reconstructor mask")
        sampled = values[self._sample_idx].astype(np.float64)
        out = np.empty(self._shape[0] * self._shape[1])
        out[self._inside] = (sampled[self._vertices] * self._weights).sum(axis=1)
        out[~self._inside] = sampled[self._nearest]
        out = out.reshape(self._shape)
        out[self._mask] = values[self._mask]  # sampled pixels pass through exactly
        return out


def lin_reconstruct(s: SampledImage) -> np.ndarray:
    """Delaunay-based piecewise-linear reconstruction of a sampled image."""
    return LinearReconstructor(s.mask)(s.values)


# --- frequency-selective reconstruction (FSR) --------------------------------


@dataclass(frozen=True)
class FsrParams:
    """FSR tunables.  `delta` is fixed to 0: reconstructed pixels never gain
    weight, which decouples the blocks."""

    block_size: int = 4
    window_size: int = 32
    iterations: int = 100
    rho: float = 0.8
    gamma: float = 0.5
    delta: float = 0.0
    # spectral selection prior: frequencies at radial distance d from DC are
    # weighted by freq_rho^d, steering the greedy selection toward smooth
    # basis functions before fine detail
    freq_rho: float = 0.8

    def __post_init__(self):
        b, w = self.block_size, self.window_size
        if b < 1 or w <= b or w % 2 or (w - b) % 2:
            raise InvalidParams("need window > block with even window and border")
        if not 0.0 < self.rho < 1.0:
            raise InvalidParams("rho must be in (0, 1)")
        if not 0.0 < self.gamma <= 1.0:
            raise InvalidParams("gamma must be in (0, 1]")
        if self.delta != 0.0:
            raise InvalidParams("only delta = 0 is supported")
        if self.iterations < 0:
            raise InvalidParams("iterations must be >= 0")
        if not 0.0 < self.freq_rho <= 1.0:
            raise InvalidParams("freq_rho must be in (0, 1]")


def _window_weights(p: FsrParams) -> np.ndarray:
    # isotropic decay rho^d from the continuous window center
    l = p.window_size
    c = (l - 1) / 2.0
    yy, xx = np.mgrid[0:l, 0:l]
    d = np.sqrt((xx - c) ** 2 + (yy - c) ** 2)
    return p.rho**d


def _fsr_chunk(fwin, wwin, p: FsrParams) -> np.ndarray:
    """Run the spectral selection loop on a stack of windows.

    fwin: (k, L, L) pixel values, wwin: (k, L, L) weights (0 at unsampled).
    Returns the (k, L, L) real model rasters.

    The loop lives entirely in the frequency domain: with S = F(w * r) the
    weighted correlation of the residual with every basis function, picking a
    frequency k and subtracting its (conjugate-paired) projection shifts the
    weight spectrum, S <- S - gamma * (c * Fw[m - k] + conj(c) * Fw[m + k]).
    """
    k, l, _ = fwin.shape
    sumw = wwin.sum(axis=(1, 2))
    live = sumw > 0
    coeff = np.zeros((k, l, l), dtype=np.complex128)
    if not live.any() or p.iterations == 0:
        return np.zeros_like(fwin)
    fw = np.fft.fft2(wwin)          # weight spectrum, constant per window
    s = np.fft.fft2(wwin * fwin)    # F(w * r), updated in place
    idx = np.arange(l)
    kk = np.arange(k)
    safe_sumw = np.where(live, sumw, 1.0)
    wrap = np.minimum(idx, l - idx)
    fsel = p.freq_rho ** np.sqrt(wrap[:, None] ** 2 + wrap[None, :] ** 2)
    fsel = fsel.ravel()
    for _ in range(p.iterations):
        flatpick = (np.abs(s.reshape(k, -1)) * fsel).argmax(axis=1)
        k1 = flatpick // l
        k2 = flatpick % l
        c = s[kk, k1, k2] / safe_sumw
        selfconj = ((k1 == 0) | (2 * k1 == l)) & ((k2 == 0) | (2 * k2 == l))
        c = np.where(selfconj, c.real.astype(np.complex128), c)
        # gather Fw shifted by +k and -k for every window
        rows_p = (idx[None, :, None] - k1[:, None, None]) % l
        cols_p = (idx[None, None, :] - k2[:, None, None]) % l
        shift_p = fw[kk[:, None, None], rows_p, cols_p]
        upd = (p.gamma * c)[:, None, None] * shift_p
        nk1 = (-k1) % l
        nk2 = (-k2) % l
        pair = ~selfconj
        if pair.any():
            rows_n = (idx[None, :, None] - nk1[:, None, None]) % l
            cols_n = (idx[None, None, :] - nk2[:, None, None]) % l
            shift_n = fw[kk[:, None, None], rows_n, cols_n]
            upd = upd + np.where(
                pair[:, None, None],
                (p.gamma * np.conj(c))[:, None, None] * shift_n,
                0.0,
            )
        s -= np.where(live[:, None, None], upd, 0.0)
        np.add.at(coeff, (kk, k1, k2), np.where(live, p.gamma * c, 0.0))
        if pair.any():
            np.add.at(
                coeff, (kk, nk1, nk2), np.where(live & pair, p.gamma * np.conj(c), 0.0)
            )
    model = np.fft.ifft2(coeff).real * (l * l)
    return model


def fsr_reconstruct(
    s: SampledImage,
    p: FsrParams = FsrParams(),
    block_order: np.ndarray | None = None,
    threads: int = 1,
    chunk: int = 1024,
) -> np.ndarray:
    """Block-parallel frequency-selective reconstruction.

    `block_order` permutes block processing (defaults to row-major); with
    delta = 0 the output is independent of it, and of `threads`, bit for bit.
    """
    values = np.asarray(s.values, dtype=np.float64)
    mask = np.asarray(s.mask, dtype=bool)
    h, w = values.shape
    b, l = p.block_size, p.window_size
    border = (l - b) // 2
    pad_h = (-h) % b
    pad_w = (-w) % b
    vp = np.pad(values * mask, ((border, border + pad_h), (border, border + pad_w)), mode="reflect")
    mp = np.pad(mask, ((border, border + pad_h), (border, border + pad_w)), mode="reflect")
    nby = (h + pad_h) // b
    nbx = (w + pad_w) // b
    nblocks = nby * nbx
    order = np.arange(nblocks) if block_order is None else np.asarray(block_order)
    if sorted(order.tolist()) != list(range(nblocks)):
        raise InvalidParams("block_order must be a permutation of all blocks")
    wprofile = _window_weights(p)
    out = np.array(values, dtype=np.float64)

    def windows(block_ids: np.ndarray):
        fwin = np.empty((len(block_ids), l, l))
        wwin = np.empty((len(block_ids), l, l))
        for i, bid in enumerate(block_ids):
            by, bx = divmod(int(bid), nbx)
            y0 = by * b
            x0 = bx * b
            fwin[i] = vp[y0 : y0 + l, x0 : x0 + l]
            wwin[i] = wprofile * mp[y0 : y0 + l, x0 : x0 + l]
        return fwin, wwin

    def run(block_ids: np.ndarray):
        fwin, wwin = windows(block_ids)
        model = _fsr_chunk(fwin, wwin, p)
        for i, bid in enumerate(block_ids):
            by, bx = divmod(int(bid), nbx)
            y0 = by * b
            x0 = bx * b
            blk = model[i, border : border + b, border : border + b]
            oy0, ox0 = y0, x0
            ys = slice(oy0, min(oy0 + b, h))
            xs = slice(ox0, min(ox0 + b, w))
            fill = ~mask[ys, xs]
            out[ys, xs][fill] = blk[: ys.stop - ys.start, : xs.stop - xs.start][fill]

    chunks = [order[i : i + chunk] for i in range(0, nblocks, chunk)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, chunks))
    else:
        for ids in chunks:
            run(ids)
    np.clip(out, 0.0, 255.0, out=out)
    out[mask] = values[mask]  # sampled pixels pass through unclipped
    return out
