"""Synthetic multi-coil phantom: ellipse magnitude, smooth phase, smooth coils.

The coil sensitivities are normalized so their sum of squares is exactly 1
at every pixel, which makes the SOS of the coil images reproduce the
magnitude image and gives reconstructions a well-defined ground truth.
"""

from __future__ import annotations

import numpy as np

from .core import MagnitudeImage, MultiCoilKSpace, fft2c

__all__ = ["phantom_generate", "phantom_image"]


def _grid(nx: int, ny: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.linspace(-1.0, 1.0, nx)[:, None]
    y = np.linspace(-1.0, 1.0, ny)[None, :]
    return np.broadcast_to(x, (nx, ny)), np.broadcast_to(y, (nx, ny))


def _ellipse(X, Y, cx, cy, ax, ay, angle):
    ct, st = np.cos(angle), np.sin(angle)
    xr = (X - cx) * ct + (Y - cy) * st
    yr = -(X - cx) * st + (Y - cy) * ct
    return (xr / ax) ** 2 + (yr / ay) ** 2 <= 1.0


def phantom_image(nx: int, ny: int, seed: int = 0) -> MagnitudeImage:
    """Piecewise-smooth magnitude image with random ellipse features."""
    rng = np.random.default_rng(seed)
    X, Y = _grid(nx, ny)
    img = np.zeros((nx, ny))
    img[_ellipse(X, Y, 0.0, 0.0, 0.78, 0.92, 0.0)] = 1.0
    for _ in range(6):
        cx, cy = rng.uniform(-0.45, 0.45, size=2)
        ax_, ay_ = rng.uniform(0.08, 0.35, size=2)
        angle = rng.uniform(0, np.pi)
        delta = rng.uniform(0.15, 0.55) * rng.choice([-1.0, 1.0])
        img[_ellipse(X, Y, cx, cy, ax_, ay_, angle)] += delta
    img = np.clip(img, 0.0, None)
    peak = img.max()
    if peak > 0:
        img /= peak
    return MagnitudeImage(img)


def _coil_sensitivities(nx: int, ny: int, nc: int, rng) -> np.ndarray:
    """Smooth low-order polynomial maps, SOS-normalized to 1 everywhere."""
    X, Y = _grid(nx, ny)
    basis = np.stack([np.ones_like(X), X, Y, X * Y, X**2, Y**2], axis=-1)
    sens = np.zeros((nx, ny, nc), dtype=np.complex128)
    for c in range(nc):
        coeff = 0.5 * (rng.standard_normal(6) + 1j * rng.standard_normal(6))
        coeff[0] = 1.0 + 0.35 * (rng.standard_normal() + 1j * rng.standard_normal())
        sens[:, :, c] = basis @ coeff
    norm = np.sqrt(np.sum(np.abs(sens) ** 2, axis=2, keepdims=True))
    return sens / norm


def phantom_generate(nx: int, ny: int, nc: int, seed: int = 0) -> MultiCoilKSpace:
    """Fully sampled multi-coil k-space of the synthetic phantom.

    SOS of the inverse FFT reproduces :func:`phantom_image` (to float
    precision) because the sensitivities are SOS-normalized and the phase
    map is unimodular.
    """
    if nc < 1:
        raise ValueError("need at least one coil")
    rng = np.random.default_rng(seed)
    mag = phantom_image(nx, ny, seed).pixels
    X, Y = _grid(nx, ny)
    a = rng.uniform(-0.5, 0.5, size=5)
    phase = np.pi * (a[0] * X + a[1] * Y + a[2] * X * Y + a[3] * X**2 + a[4] * Y**2)
    sens = _coil_sensitivities(nx, ny, nc, rng)
    coil_images = mag[:, :, None] * np.exp(1j * phase)[:, :, None] * sens
    return MultiCoilKSpace(fft2c(coil_images))
