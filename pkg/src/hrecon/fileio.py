"""Bit-exact file formats for k-space (CKS) and sampling masks (MSK).

CKS layout: magic b"CKS1", u32-LE nx, ny, nc, then nx*ny*nc complex samples
as float32-LE (re, im) pairs, coil-major then row-major within a coil
(flat index = c*nx*ny + i*ny + j).

MSK layout: magic b"MSK1", u32-LE nx, ny, then nx*ny bytes (0 or 1,
row-major), then u32-LE acs_row0, acs_rows, acs_col0, acs_cols.
"""

from __future__ import annotations

import struct

import numpy as np

from .core import MagnitudeImage, MultiCoilKSpace, SamplingMask

__all__ = [
    "FormatError",
    "serialize_kspace",
    "deserialize_kspace",
    "serialize_mask",
    "deserialize_mask",
    "read_kspace",
    "write_kspace",
    "read_mask",
    "write_mask",
    "write_pgm",
]

CKS_MAGIC = b"CKS1"
MSK_MAGIC = b"MSK1"

# Caps array sizes read from untrusted headers (2 GiB of payload).
MAX_ELEMENTS = 2**28


class FormatError(ValueError):
    """Malformed CKS/MSK stream."""


def serialize_kspace(k: MultiCoilKSpace) -> bytes:
    data = k.data if isinstance(k, MultiCoilKSpace) else MultiCoilKSpace(k).data
    nx, ny, nc = data.shape
    header = CKS_MAGIC + struct.pack("<III", nx, ny, nc)
    # (nc, nx, ny) C-order ravel realizes the coil-major index c*nx*ny + i*ny + j
    payload = np.ascontiguousarray(data.transpose(2, 0, 1)).astype("<c8").tobytes()
    return header + payload


def deserialize_kspace(stream: bytes) -> MultiCoilKSpace:
    if stream[:4] != CKS_MAGIC:
        raise FormatError(f"bad magic {stream[:4]!r}, expected {CKS_MAGIC!r}")
    if len(stream) < 16:
        raise FormatError(f"header truncated: got {len(stream)} bytes, need at least 16")
    nx, ny, nc = struct.unpack("<III", stream[4:16])
    if min(nx, ny, nc) < 1:
        raise FormatError(f"non-positive dimensions nx={nx} ny={ny} nc={nc}")
    n = nx * ny * nc
    if n > MAX_ELEMENTS:
        raise FormatError(f"dimension overflow: nx*ny*nc = {n} exceeds {MAX_ELEMENTS}")
    expected = 16 + 8 * n
    if len(stream) < expected:
        raise FormatError(
            f"payload truncated: expected {expected} bytes, got {len(stream)}"
        )
    if len(stream) > expected:
        raise FormatError(
            f"trailing bytes: expected {expected} bytes, got {len(stream)}"
        )
    flat = np.frombuffer(stream, dtype="<c8", count=n, offset=16)
    data = flat.reshape(nc, nx, ny).transpose(1, 2, 0)
    return MultiCoilKSpace(data.astype(np.complex128))


def serialize_mask(m: SamplingMask) -> bytes:
    header = MSK_MAGIC + struct.pack("<II", m.nx, m.ny)
    body = m.mask.astype(np.uint8).tobytes()
    trailer = struct.pack("<IIII", *m.acs)
    return header + body + trailer


def deserialize_mask(stream: bytes) -> SamplingMask:
    if stream[:4] != MSK_MAGIC:
        raise FormatError(f"bad magic {stream[:4]!r}, expected {MSK_MAGIC!r}")
    if len(stream) < 12:
        raise FormatError(f"header truncated: got {len(stream)} bytes, need at least 12")
    nx, ny = struct.unpack("<II", stream[4:12])
    if min(nx, ny) < 1:
        raise FormatError(f"non-positive dimensions nx={nx} ny={ny}")
    n = nx * ny
    if n > MAX_ELEMENTS:
        raise FormatError(f"dimension overflow: nx*ny = {n} exceeds {MAX_ELEMENTS}")
    expected = 12 + n + 16
    if len(stream) != expected:
        raise FormatError(f"bad length: expected {expected} bytes, got {len(stream)}")
    body = np.frombuffer(stream, dtype=np.uint8, count=n, offset=12)
    if not np.all((body == 0) | (body == 1)):
        raise FormatError("mask bytes must be 0 or 1")
    acs = struct.unpack("<IIII", stream[12 + n :])
    return SamplingMask(body.reshape(nx, ny).astype(bool), acs)


def write_kspace(path, k: MultiCoilKSpace) -> None:
    with open(path, "wb") as f:
        f.write(serialize_kspace(k))


def read_kspace(path) -> MultiCoilKSpace:
    with open(path, "rb") as f:
        return deserialize_kspace(f.read())


def write_mask(path, m: SamplingMask) -> None:
    with open(path, "wb") as f:
        f.write(serialize_mask(m))


def read_mask(path) -> SamplingMask:
    with open(path, "rb") as f:
        return deserialize_mask(f.read())


def write_pgm(path, image, maxval: int = 255) -> None:
    """8-bit binary PGM preview, scaled so the image maximum maps to maxval."""
    pixels = image.pixels if isinstance(image, MagnitudeImage) else np.asarray(image)
    pixels = pixels.astype(np.float64)
    peak = pixels.max()
    scaled = np.zeros_like(pixels) if peak <= 0 else pixels / peak * maxval
    body = np.clip(np.round(scaled), 0, maxval).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(f"P5\n{pixels.shape[1]} {pixels.shape[0]}\n{maxval}\n".encode())
        f.write(body.tobytes())
