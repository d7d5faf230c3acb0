"""Structured low-rank Hankel tensor reconstruction for parallel MRI."""

import os as _os

# honor the thread cap before BLAS pools initialize (numpy import below)
if "HRECON_THREADS" in _os.environ:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _os.environ["HRECON_THREADS"])

from .core import MagnitudeImage, MultiCoilKSpace, SamplingMask, fft2c, ifft2c, sos_combine
from .hankel import (
    HankelMatrix,
    PatchTensor,
    hankel_adjoint,
    hankel_forward,
    hankel_pinv,
    tensor_form,
    tensor_unform,
)
from .bridge import ExternalProcessScore
from .estimators import LrkgmReconstructor, SakeReconstructor, ZeroFilledReconstructor
from .lowrank import LowRankConfig, fold, lowrank_rotate, svd_truncate, unfold
from .masks import MaskSpec, mask_generate
from .metrics import psnr, ssim
from .phantom import phantom_generate, phantom_image
from .pipeline import (
    ReconAborted,
    ReconConfig,
    ReconReport,
    dc_project,
    lrkgm_recon,
    run_reconstruction,
    sake_recon,
    zero_filled_recon,
)
from .sde import (
    GaussianScore,
    SamplerParams,
    SigmaSchedule,
    corrector_step,
    gaussian_score,
    geometric_schedule,
    noise_like,
    pc_sample,
    predictor_step,
)

__version__ = "0.1.0"

__all__ = [
    "ExternalProcessScore",
    "GaussianScore",
    "HankelMatrix",
    "LowRankConfig",
    "LrkgmReconstructor",
    "MagnitudeImage",
    "MaskSpec",
    "MultiCoilKSpace",
    "PatchTensor",
    "ReconAborted",
    "ReconConfig",
    "ReconReport",
    "SakeReconstructor",
    "SamplerParams",
    "SamplingMask",
    "SigmaSchedule",
    "ZeroFilledReconstructor",
    "corrector_step",
    "dc_project",
    "fft2c",
    "fold",
    "gaussian_score",
    "geometric_schedule",
    "hankel_adjoint",
    "hankel_forward",
    "hankel_pinv",
    "ifft2c",
    "lowrank_rotate",
    "lrkgm_recon",
    "mask_generate",
    "noise_like",
    "pc_sample",
    "phantom_generate",
    "phantom_image",
    "predictor_step",
    "psnr",
    "run_reconstruction",
    "sake_recon",
    "sos_combine",
    "ssim",
    "svd_truncate",
    "tensor_form",
    "tensor_unform",
    "unfold",
    "zero_filled_recon",
]
