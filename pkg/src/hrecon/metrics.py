"""Image quality metrics: PSNR and SSIM on magnitude images.

Both metrics normalize the pair by the reference maximum first, so values
are comparable across datasets regardless of physical k-space units.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import convolve2d

from .core import MagnitudeImage

__all__ = ["psnr", "ssim"]

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _as_pixels(img) -> np.ndarray:
    if isinstance(img, MagnitudeImage):
        return img.pixels
    return np.asarray(img, dtype=np.float64)


def _normalized_pair(reference, test) -> tuple[np.ndarray, np.ndarray]:
    ref = _as_pixels(reference)
    tst = _as_pixels(test)
    if ref.shape != tst.shape:
        raise ValueError(f"shape mismatch: reference {ref.shape} vs test {tst.shape}")
    peak = ref.max()
    if peak <= 0:
        raise ValueError("reference image is identically zero")
    return ref / peak, tst / peak


def psnr(reference, test) -> float:
    """Peak signal-to-noise ratio in dB, peak fixed at 1.0 after normalization.

    Returns +inf when the images are identical.
    """
    ref, tst = _normalized_pair(reference, test)
    mse = np.mean((ref - tst) ** 2)
    if mse == 0.0:
        return float("inf")
    return float(-10.0 * np.log10(mse))


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    """Normalized 2D Gaussian kernel used as the SSIM local window."""
    half = (size - 1) / 2.0
    coords = np.arange(size) - half
    g = np.exp(-(coords**2) / (2.0 * sigma**2))
    w = np.outer(g, g)
    return w / w.sum()


def ssim(reference, test) -> float:
    """Mean local SSIM with an 11x11 Gaussian window (sigma=1.5), L=1.

    Uses population (weighted) variances and valid-mode windows, so border
    pixels that do not admit a full window are excluded.
    """
    ref, tst = _normalized_pair(reference, test)
    if ref.shape[0] < SSIM_WINDOW or ref.shape[1] < SSIM_WINDOW:
        raise ValueError(
            f"image {ref.shape} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window"
        )
    w = gaussian_window()
    c1 = SSIM_K1**2
    c2 = SSIM_K2**2

    mu_x = convolve2d(ref, w, mode="valid")
    mu_y = convolve2d(tst, w, mode="valid")
    sxx = convolve2d(ref * ref, w, mode="valid") - mu_x**2
    syy = convolve2d(tst * tst, w, mode="valid") - mu_y**2
    sxy = convolve2d(ref * tst, w, mode="valid") - mu_x * mu_y

    num = (2 * mu_x * mu_y + c1) * (2 * sxy + c2)
    den = (mu_x**2 + mu_y**2 + c1) * (sxx + syy + c2)
    return float(np.mean(num / den))
