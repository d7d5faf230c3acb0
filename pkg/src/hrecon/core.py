"""Core data types and k-space/image transforms.

Conventions used throughout the package:

* k-space arrays are complex, shaped ``(nx, ny, nc)`` with the readout
  dimension first, phase encode second, coils last.
* FFTs are centered (DC at ``nx//2, ny//2``) and orthonormal, so
  ``ifft2c(fft2c(x)) == x`` and Parseval holds without scale factors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "MultiCoilKSpace",
    "SamplingMask",
    "MagnitudeImage",
    "fft2c",
    "ifft2c",
    "sos_combine",
]


def _require_finite(arr: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf entries")


@dataclass
class MultiCoilKSpace:
    """Multi-coil k-space samples, complex array of shape (nx, ny, nc)."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.complex128)
        if self.data.ndim != 3:
            raise ValueError(
                f"k-space must be 3D (nx, ny, nc), got shape {self.data.shape}"
            )
        if min(self.data.shape) < 1:
            raise ValueError(f"k-space dimensions must be positive, got {self.data.shape}")
        _require_finite(self.data, "k-space")

    @property
    def nx(self) -> int:
        return self.data.shape[0]

    @property
    def ny(self) -> int:
        return self.data.shape[1]

    @property
    def nc(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    def copy(self) -> "MultiCoilKSpace":
        return MultiCoilKSpace(self.data.copy())


@dataclass
class SamplingMask:
    """Binary sampling mask over an (nx, ny) grid with a fully sampled ACS block.

    ``acs`` is the rectangle (row0, rows, col0, cols); the region must be
    contained in the sampled set.
    """

    mask: np.ndarray
    acs: tuple[int, int, int, int] = (0, 0, 0, 0)

    def __post_init__(self):
        self.mask = np.asarray(self.mask).astype(bool)
        if self.mask.ndim != 2:
            raise ValueError(f"mask must be 2D, got shape {self.mask.shape}")
        r0, nr, c0, ncols = (int(v) for v in self.acs)
        self.acs = (r0, nr, c0, ncols)
        if nr < 0 or ncols < 0:
            raise ValueError("ACS extents must be nonnegative")
        if nr > 0 and ncols > 0:
            if r0 < 0 or c0 < 0 or r0 + nr > self.nx or c0 + ncols > self.ny:
                raise ValueError(
                    f"ACS rectangle {self.acs} does not fit inside {self.nx}x{self.ny}"
                )
            if not self.mask[r0 : r0 + nr, c0 : c0 + ncols].all():
                raise ValueError("ACS region must be fully sampled (ACS ⊆ omega)")

    @property
    def nx(self) -> int:
        return self.mask.shape[0]

    @property
    def ny(self) -> int:
        return self.mask.shape[1]

    @property
    def n_sampled(self) -> int:
        return int(self.mask.sum())

    @property
    def acceleration(self) -> float:
        """R = total grid points / sampled points."""
        n = self.n_sampled
        if n == 0:
            raise ValueError("mask has no sampled points")
        return self.mask.size / n

    def omega(self) -> np.ndarray:
        """Sampled (row, col) index pairs, shape (n_sampled, 2)."""
        return np.argwhere(self.mask)


@dataclass
class MagnitudeImage:
    """Nonnegative real-valued image of shape (nx, ny)."""

    pixels: np.ndarray

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float64)
        if self.pixels.ndim != 2:
            raise ValueError(f"image must be 2D, got shape {self.pixels.shape}")
        _require_finite(self.pixels, "image")
        if np.any(self.pixels < 0):
            raise ValueError("magnitude image has negative pixels")

    @property
    def nx(self) -> int:
        return self.pixels.shape[0]

    @property
    def ny(self) -> int:
        return self.pixels.shape[1]


def _as_array(x) -> np.ndarray:
    if isinstance(x, MultiCoilKSpace):
        return x.data
    return np.asarray(x)


def fft2c(image_stack) -> np.ndarray:
    """Centered orthonormal 2D FFT over the first two axes, per coil.

    Accepts (nx, ny) or (nx, ny, nc) arrays; DC ends up at (nx//2, ny//2).
    """
    x = _as_array(image_stack)
    if not np.all(np.isfinite(x)):
        raise ValueError("fft2c: input contains NaN or Inf")
    axes = (0, 1)
    return np.fft.fftshift(
        np.fft.fft2(np.fft.ifftshift(x, axes=axes), axes=axes, norm="ortho"),
        axes=axes,
    )


def ifft2c(kspace) -> np.ndarray:
    """Inverse of :func:`fft2c` (centered, orthonormal)."""
    k = _as_array(kspace)
    if not np.all(np.isfinite(k)):
        raise ValueError("ifft2c: input contains NaN or Inf")
    axes = (0, 1)
    return np.fft.fftshift(
        np.fft.ifft2(np.fft.ifftshift(k, axes=axes), axes=axes, norm="ortho"),
        axes=axes,
    )


def sos_combine(coil_images) -> MagnitudeImage:
    """Sum-of-squares coil combination: sqrt(sum_c |image_c|^2)."""
    x = _as_array(coil_images)
    if x.ndim == 2:
        x = x[:, :, None]
    if x.ndim != 3:
        raise ValueError(f"expected (nx, ny, nc) coil images, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("sos_combine: input contains NaN or Inf")
    return MagnitudeImage(np.sqrt(np.sum(np.abs(x) ** 2, axis=2)))
