"""Block-Hankel structuring of multi-coil k-space and patch-tensor forming.

``hankel_forward`` slides a w x w x nc window over k-space and stacks each
vectorized block as a matrix column; ``hankel_pinv`` maps a matrix back to
k-space by averaging every entry that originated from the same location.
``tensor_form``/``tensor_unform`` cut the matrix's long axis into square
patches stacked along a third dimension, and scatter them back with
overlap averaging.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import MultiCoilKSpace

__all__ = [
    "HankelMatrix",
    "PatchTensor",
    "hankel_forward",
    "hankel_pinv",
    "hankel_adjoint",
    "tensor_form",
    "tensor_unform",
]

# data layout of HankelMatrix.data
KERNEL_ROWS = "kernel_rows"  # (w*w*nc, L): vectorized window blocks are columns
WINDOW_ROWS = "window_rows"  # (L, w*w*nc): transpose, the patch-extraction layout


@dataclass
class HankelMatrix:
    """Block-wise Hankel data matrix with the metadata needed to invert it.

    ``orientation`` records which axis carries the w*w*nc kernel entries;
    everything in this module accepts either and normalizes internally.
    """

    data: np.ndarray
    window: int
    source_dims: tuple[int, int, int]
    orientation: str = KERNEL_ROWS

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.complex128)
        nx, ny, nc = self.source_dims
        w = self.window
        if self.orientation not in (KERNEL_ROWS, WINDOW_ROWS):
            raise ValueError(f"unknown orientation {self.orientation!r}")
        expected = (w * w * nc, (nx - w + 1) * (ny - w + 1))
        if self.orientation == WINDOW_ROWS:
            expected = expected[::-1]
        if self.data.shape != expected:
            raise ValueError(
                f"matrix shape {self.data.shape} inconsistent with window={w}, "
                f"source_dims={self.source_dims} (expected {expected})"
            )

    @property
    def kernel_size(self) -> int:
        """w*w*nc, the short axis."""
        w = self.window
        return w * w * self.source_dims[2]

    @property
    def long_size(self) -> int:
        """(nx-w+1)*(ny-w+1), the sliding-window axis."""
        nx, ny, _ = self.source_dims
        w = self.window
        return (nx - w + 1) * (ny - w + 1)

    def kernel_rows_view(self) -> np.ndarray:
        """The (w*w*nc, L) layout, transposing if needed."""
        return self.data if self.orientation == KERNEL_ROWS else self.data.T

    def window_rows_view(self) -> np.ndarray:
        """The (L, w*w*nc) layout, transposing if needed."""
        return self.data.T if self.orientation == KERNEL_ROWS else self.data


@dataclass
class PatchTensor:
    """Square patches cut from the Hankel matrix, stacked along axis 2.

    ``col_map`` lists each patch's (start, stop) range on the matrix's
    long (sliding-window) axis, in ascending start order; the final range
    may overlap its predecessor when the axis is not an exact multiple of
    the patch size.
    """

    data: np.ndarray
    col_map: list[tuple[int, int]]
    window: int
    source_dims: tuple[int, int, int]

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.complex128)
        if self.data.ndim != 3 or self.data.shape[0] != self.data.shape[1]:
            raise ValueError(f"patch tensor must be (p, p, n), got {self.data.shape}")
        p = self.data.shape[0]
        if len(self.col_map) != self.data.shape[2]:
            raise ValueError("col_map length must equal the number of patches")
        prev_start = -1
        for start, stop in self.col_map:
            if stop - start != p:
                raise ValueError(f"col_map range ({start}, {stop}) has width != {p}")
            if start < 0:
                raise ValueError(f"col_map range ({start}, {stop}) out of bounds")
            if start <= prev_start:
                raise ValueError("col_map ranges must be in ascending start order")
            prev_start = start

    @property
    def patch_size(self) -> int:
        return self.data.shape[0]

    @property
    def n_patches(self) -> int:
        return self.data.shape[2]


def hankel_forward(k, window: int) -> HankelMatrix:
    """Build the (w*w*nc) x (nx-w+1)(ny-w+1) block-Hankel matrix.

    Column (a, b) holds the vectorized w x w x nc block of k-space starting
    at (a, b); row index is c*w*w + u*w + v for in-window offset (u, v).
    """
    data = k.data if isinstance(k, MultiCoilKSpace) else np.asarray(k, dtype=np.complex128)
    if data.ndim != 3:
        raise ValueError(f"expected (nx, ny, nc) k-space, got shape {data.shape}")
    nx, ny, nc = data.shape
    w = int(window)
    if w < 1 or w > min(nx, ny):
        raise ValueError(f"window {w} out of range [1, {min(nx, ny)}]")
    # (nx', ny', nc, w, w) -> rows ordered (c, u, v), columns ordered (a, b)
    blocks = sliding_window_view(data, (w, w), axis=(0, 1))
    m = blocks.transpose(2, 3, 4, 0, 1).reshape(w * w * nc, -1)
    return HankelMatrix(np.ascontiguousarray(m), w, (nx, ny, nc))


@lru_cache(maxsize=32)
def _multiplicity(nx: int, ny: int, w: int) -> np.ndarray:
    """How many sliding windows cover each (i, j); cached per geometry."""

    def axis_counts(n: int) -> np.ndarray:
        i = np.arange(n)
        return np.minimum(i, n - w) - np.maximum(0, i - w + 1) + 1

    counts = np.outer(axis_counts(nx), axis_counts(ny)).astype(np.float64)
    counts.flags.writeable = False
    return counts


def _scatter_sum(m: HankelMatrix) -> np.ndarray:
    """Accumulate matrix entries back onto the k-space grid (no averaging)."""
    nx, ny, nc = m.source_dims
    w = m.window
    nxp, nyp = nx - w + 1, ny - w + 1
    blocks = m.kernel_rows_view().reshape(nc, w, w, nxp, nyp)
    acc = np.zeros((nx, ny, nc), dtype=np.complex128)
    for u in range(w):
        for v in range(w):
            acc[u : u + nxp, v : v + nyp, :] += blocks[:, u, v].transpose(1, 2, 0)
    return acc


def hankel_pinv(m: HankelMatrix) -> MultiCoilKSpace:
    """Pseudo-inverse of :func:`hankel_forward`: per-location entry averaging.

    Equal to (H^T H)^{-1} H^T applied to the matrix, H^T H being diagonal
    with the window multiplicity of each location.
    """
    nx, ny, _ = m.source_dims
    acc = _scatter_sum(m)
    acc /= _multiplicity(nx, ny, m.window)[:, :, None]
    return MultiCoilKSpace(acc)


def hankel_adjoint(m: HankelMatrix) -> np.ndarray:
    """H^T: multiplicity-weighted scatter (sum, not average) onto k-space."""
    return _scatter_sum(m)


def patch_ranges(long_size: int, patch: int, drop_remainder: bool = False) -> list[tuple[int, int]]:
    """Contiguous (start, stop) patch ranges tiling [0, long_size).

    Full patches tile from 0; when the axis is not an exact multiple and
    ``drop_remainder`` is false, one extra patch covering the final
    ``patch`` entries is appended (overlapping its predecessor) so every
    entry is covered.
    """
    if long_size < patch:
        raise ValueError(f"long axis {long_size} shorter than patch size {patch}")
    n_full = long_size // patch
    ranges = [(i * patch, (i + 1) * patch) for i in range(n_full)]
    if long_size % patch and not drop_remainder:
        ranges.append((long_size - patch, long_size))
    return ranges


def tensor_form(m: HankelMatrix, drop_remainder: bool = False) -> PatchTensor:
    """Cut the matrix's long axis into p x p patches stacked along axis 2."""
    p = m.kernel_size
    tall = m.window_rows_view()
    ranges = patch_ranges(m.long_size, p, drop_remainder)
    data = np.stack([tall[r0:r1] for r0, r1 in ranges], axis=2)
    return PatchTensor(data, ranges, m.window, m.source_dims)


def tensor_unform(t: PatchTensor, long_size: int | None = None) -> HankelMatrix:
    """Scatter patches back into the Hankel matrix, averaging overlaps."""
    p = t.patch_size
    if long_size is None:
        long_size = max(stop for _, stop in t.col_map)
    sums = np.zeros((long_size, p), dtype=np.complex128)
    counts = np.zeros(long_size, dtype=np.float64)
    for idx, (r0, r1) in enumerate(t.col_map):
        if r1 > long_size:
            raise ValueError(f"col_map range ({r0}, {r1}) exceeds long axis {long_size}")
        sums[r0:r1] += t.data[:, :, idx]
        counts[r0:r1] += 1.0
    if np.any(counts == 0):
        gap = int(np.argmax(counts == 0))
        raise ValueError(f"col_map leaves row {gap} of the long axis uncovered")
    sums /= counts[:, None]
    # window-rows orientation avoids a transpose copy (~50x source size at full scale)
    return HankelMatrix(sums, t.window, t.source_dims, orientation=WINDOW_ROWS)
