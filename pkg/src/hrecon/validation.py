"""Input coercion/validation helpers shared by the estimators and the CLI."""

from __future__ import annotations

import numpy as np

from .core import MagnitudeImage, MultiCoilKSpace, SamplingMask

__all__ = ["check_kspace", "check_mask", "check_image"]


def check_kspace(X) -> MultiCoilKSpace:
    """Coerce to MultiCoilKSpace; 2D arrays get a singleton coil axis."""
    if isinstance(X, MultiCoilKSpace):
        return X
    arr = np.asarray(X)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    return MultiCoilKSpace(arr)


def check_mask(mask, kspace: MultiCoilKSpace | None = None) -> SamplingMask:
    """Coerce to SamplingMask and, when k-space is given, check grid agreement."""
    if not isinstance(mask, SamplingMask):
        mask = SamplingMask(np.asarray(mask))
    if kspace is not None and mask.mask.shape != kspace.shape[:2]:
        raise ValueError(
            f"mask grid {mask.mask.shape} does not match k-space {kspace.shape[:2]}"
        )
    return mask


def check_image(img) -> MagnitudeImage:
    if isinstance(img, MagnitudeImage):
        return img
    return MagnitudeImage(np.asarray(img))
