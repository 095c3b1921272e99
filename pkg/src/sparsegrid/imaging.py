"""Raster I/O (binary PGM), cropping, and mask application.

Images are (H, W) float64 arrays with 8-bit provenance: values in [0, 255]
on ingest and on final write.
"""

import re
from pathlib import Path

import numpy as np

from .errors import CorruptHeader, CropTooLarge, DimsMismatch, UnsupportedFormat
from .patterns import DensityPrefix, to_bitmap
from .reconstruction import SampledImage


def load_pgm(path) -> np.ndarray:
    """Read a binary (P5) PGM with maxval 255 into a float raster."""
    data = Path(path).read_bytes()
    if not data.startswith(b"P5"):
        raise UnsupportedFormat("only binary PGM (P5) is supported")
    # header: magic, width, height, maxval; '#' comments allowed between tokens
    pos = 2
    tokens = []
    while len(tokens) < 3:
        m = re.compile(rb"\s+(?:#[^\n]*\n\s*)*([0-9]+)").match(data, pos)
        if m is None:
            raise CorruptHeader("truncated or malformed PGM header")
        tokens.append(int(m.group(1)))
        pos = m.end()
    width, height, maxval = tokens
    if maxval != 255:
        raise UnsupportedFormat(f"maxval {maxval} not supported (need 255)")
    pos += 1  # single whitespace byte after maxval
    payload = data[pos : pos + width * height]
    if len(payload) != width * height:
        raise CorruptHeader("pixel payload shorter than header promises")
    return np.frombuffer(payload, dtype=np.uint8).astype(np.float64).reshape(height, width)


def save_pgm(img: np.ndarray, path) -> None:
    """Write a float raster as binary PGM, rounding and clipping to 8 bit."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise UnsupportedFormat("PGM output requires a 2-D raster")
    h, w = img.shape
    payload = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(payload.tobytes())


def save_prefix_pgm(pfx: DensityPrefix, path) -> None:
    """Export a prefix bitmap as PGM: 255 where sampled, 0 elsewhere."""
    save_pgm(to_bitmap(pfx) * 255.0, path)


def center_crop(img: np.ndarray, crop_width: int, crop_height: int) -> np.ndarray:
    h, w = img.shape
    if crop_width > w or crop_height > h:
        raise CropTooLarge(f"cannot crop {w}x{h} to {crop_width}x{crop_height}")
    # centered window; on odd leftovers the window shifts toward top-left
    x0 = (w - crop_width) // 2
    y0 = (h - crop_height) // 2
    return img[y0 : y0 + crop_height, x0 : x0 + crop_width].copy()


def apply_mask(img: np.ndarray, pfx: DensityPrefix) -> SampledImage:
    """Simulate sub-sampled acquisition: keep pixel values at prefix cells."""
    dims = pfx.pattern.dims
    if img.shape != (dims.height, dims.width):
        raise DimsMismatch(f"image {img.shape} vs pattern {dims}")
    mask = to_bitmap(pfx)
    values = np.where(mask, img, 0.0)
    return SampledImage(values=values, mask=mask)
