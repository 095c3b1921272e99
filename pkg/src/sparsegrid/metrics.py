"""PSNR fidelity metrics (8-bit scale, peak 255)."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimsMismatch, EmptySet, InfiniteEntry

PEAK = 255.0


@dataclass(frozen=True)
class PsnrResult:
    mse: float
    psnr_db: float  # math.inf when mse == 0
    peak: float = PEAK


def psnr(reference: np.ndarray, candidate: np.ndarray) -> PsnrResult:
    reference = np.asarray(reference, dtype=np.float64)
    candidate = np.asarray(candidate, dtype=np.float64)
    if reference.shape != candidate.shape:
        raise DimsMismatch(f"{reference.shape} vs {candidate.shape}")
    mse = float(np.mean((reference - candidate) ** 2))
    if mse == 0.0:
        return PsnrResult(mse=0.0, psnr_db=math.inf)
    return PsnrResult(mse=mse, psnr_db=10.0 * math.log10(PEAK**2 / mse))


def mean_psnr(refs, candidates, strict: bool = False) -> float:
    """Arithmetic mean of per-image PSNR values.

    With strict=True an infinite entry raises; otherwise infinities propagate
    into the mean (matching mean-of-PSNRs semantics).
    """
    refs = list(refs)
    candidates = list(candidates)
    if len(refs) != len(candidates):
        raise DimsMismatch("reference and candidate sets differ in length")
    if not refs:
        raise EmptySet("cannot average over an empty image set")
    values = [psnr(r, c).psnr_db for r, c in zip(refs, candidates)]
    if strict and any(math.isinf(v) for v in values):
        raise InfiniteEntry("infinite PSNR entry in strict mode")
    return sum(values) / len(values)
