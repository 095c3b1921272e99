"""sparsegrid: incremental non-regular image sampling patterns and reconstruction.

Generate incremental sampling patterns (RAND, SOBOL, GAUSS), measure their
uniformity via discrepancy, simulate sub-sampled acquisition, reconstruct
full-resolution images (linear interpolation and frequency-selective
reconstruction), and benchmark PSNR versus sampling density.
"""

from .discrepancy import (
    DiscrepancyReport,
    estimate_discrepancy,
    exact_discrepancy,
    metropolis_optimize,
    to_unit_points,
)
from .generators import (
    GaussParams,
    ProbabilityField,
    field_init,
    gen_gauss,
    gen_rand,
    gen_sobol,
    make_rng,
    sobol_points,
)
from .imaging import apply_mask, center_crop, load_pgm, save_pgm, save_prefix_pgm
from .metrics import PsnrResult, mean_psnr, psnr
from .patterns import (
    DensityPrefix,
    GridDims,
    SamplingPattern,
    density_to_count,
    parse,
    prefix,
    serialize,
    to_bitmap,
)
from .reconstruction import (
    FsrParams,
    LinearReconstructor,
    SampledImage,
    fsr_reconstruct,
    lin_reconstruct,
)

__version__ = "0.1.0"

__all__ = [
    "DensityPrefix",
    "DiscrepancyReport",
    "FsrParams",
    "GaussParams",
    "GridDims",
    "LinearReconstructor",
    "ProbabilityField",
    "PsnrResult",
    "SampledImage",
    "SamplingPattern",
    "apply_mask",
    "center_crop",
    "density_to_count",
    "estimate_discrepancy",
    "exact_discrepancy",
    "field_init",
    "fsr_reconstruct",
    "gen_gauss",
    "gen_rand",
    "gen_sobol",
    "lin_reconstruct",
    "load_pgm",
    "make_rng",
    "mean_psnr",
    "metropolis_optimize",
    "parse",
    "prefix",
    "psnr",
    "save_pgm",
    "save_prefix_pgm",
    "serialize",
    "sobol_points",
    "to_bitmap",
    "to_unit_points",
]
