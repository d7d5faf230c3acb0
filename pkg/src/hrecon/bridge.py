"""Client side of the external score-provider protocol.

Frames are length-prefixed on both directions: an unsigned 32-bit LE count
of the body bytes, then the body.

* request body:  type 0x01 | sigma float64-LE | three u32-LE dims | payload
  of float32-LE values (d0*d1*d2 of them)
* response body: type 0x02 | three u32-LE dims (equal to the request) |
  float32-LE score payload
* error body:    type 0xFF | UTF-8 message

Tensors travel as real, three-dimensional float32 arrays.  A complex
(a, b, c) tensor is sent as the real view with the trailing complex axis
expanded to interleaved (re, im) pairs, i.e. dims (a, b, 2c); the client
folds the response back to complex.  One request gets exactly one
response; a provider process serves a single consumer.
"""

from __future__ import annotations

import shlex
import struct
import subprocess

import numpy as np

__all__ = [
    "MSG_SCORE_REQUEST",
    "MSG_SCORE_RESPONSE",
    "MSG_ERROR",
    "encode_request",
    "encode_response",
    "encode_error",
    "read_frame",
    "complex_to_wire",
    "wire_to_complex",
    "ExternalProcessScore",
]

MSG_SCORE_REQUEST = 0x01
MSG_SCORE_RESPONSE = 0x02
MSG_ERROR = 0xFF

MAX_FRAME_BYTES = 1 << 30


def complex_to_wire(x: np.ndarray) -> np.ndarray:
    """Complex (a, b, c) -> real float32 (a, b, 2c), interleaved re/im."""
    x64 = np.ascontiguousarray(x, dtype=np.complex64)
    return x64.view(np.float32).reshape(x.shape[0], x.shape[1], 2 * x.shape[2])


def wire_to_complex(r: np.ndarray) -> np.ndarray:
    """Inverse of :func:`complex_to_wire`."""
    if r.shape[-1] % 2:
        raise ValueError("trailing wire dimension must be even for complex tensors")
    flat = np.ascontiguousarray(r, dtype=np.float32)
    return flat.view(np.complex64).reshape(r.shape[0], r.shape[1], r.shape[2] // 2)


def encode_request(payload: np.ndarray, sigma: float) -> bytes:
    """Frame a real 3D float32 tensor as a score request."""
    arr = np.ascontiguousarray(payload, dtype="<f4")
    if arr.ndim != 3:
        raise ValueError(f"wire tensors are 3D, got shape {arr.shape}")
    body = (
        bytes([MSG_SCORE_REQUEST])
        + struct.pack("<d", float(sigma))
        + struct.pack("<III", *arr.shape)
        + arr.tobytes()
    )
    return struct.pack("<I", len(body)) + body


def encode_response(payload: np.ndarray) -> bytes:
    arr = np.ascontiguousarray(payload, dtype="<f4")
    if arr.ndim != 3:
        raise ValueError(f"wire tensors are 3D, got shape {arr.shape}")
    body = bytes([MSG_SCORE_RESPONSE]) + struct.pack("<III", *arr.shape) + arr.tobytes()
    return struct.pack("<I", len(body)) + body


def encode_error(message: str) -> bytes:
    body = bytes([MSG_ERROR]) + message.encode("utf-8")
    return struct.pack("<I", len(body)) + body


def read_frame(stream) -> tuple[int, bytes] | None:
    """Read one (type, body-after-type) frame; None on clean end-of-stream."""
    header = stream.read(4)
    if len(header) == 0:
        return None
    if len(header) < 4:
        raise EOFError("stream ended inside a frame length prefix")
    (length,) = struct.unpack("<I", header)
    if length < 1 or length > MAX_FRAME_BYTES:
        raise ValueError(f"implausible frame length {length}")
    body = stream.read(length)
    if len(body) < length:
        raise EOFError(f"stream ended inside a frame: expected {length} body bytes, got {len(body)}")
    return body[0], body[1:]


def decode_response_body(rest: bytes) -> np.ndarray:
    if len(rest) < 12:
        raise ValueError("response too short for dims")
    dims = struct.unpack("<III", rest[:12])
    n = dims[0] * dims[1] * dims[2]
    if len(rest) != 12 + 4 * n:
        raise ValueError(f"response payload length {len(rest) - 12} != 4*{n}")
    return np.frombuffer(rest, dtype="<f4", count=n, offset=12).reshape(dims)


class ExternalProcessScore:
    """Score provider backed by a subprocess speaking the stdio frame protocol.

    The command is spawned once and serialized: one in-flight request at a
    time.  Complex inputs are folded to the real wire layout and the
    response folded back, so this drops into any place a score callable is
    expected.
    """

    def __init__(self, command):
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self._proc = subprocess.Popen(
            self.command, stdin=subprocess.PIPE, stdout=subprocess.PIPE
        )

    def __call__(self, x, sigma: float) -> np.ndarray:
        x = np.asarray(x)
        is_complex = np.iscomplexobj(x)
        wire = complex_to_wire(x) if is_complex else np.asarray(x, dtype=np.float32)
        if wire.ndim != 3:
            raise ValueError(f"external provider needs 3D tensors, got shape {x.shape}")
        if self._proc.poll() is not None:
            raise RuntimeError(f"score provider exited with code {self._proc.returncode}")
        self._proc.stdin.write(encode_request(wire, sigma))
        self._proc.stdin.flush()
        frame = read_frame(self._proc.stdout)
        if frame is None:
            raise RuntimeError("score provider closed its output stream")
        kind, rest = frame
        if kind == MSG_ERROR:
            raise RuntimeError(f"score provider error: {rest.decode('utf-8', 'replace')}")
        if kind != MSG_SCORE_RESPONSE:
            raise RuntimeError(f"unexpected frame type 0x{kind:02X} from score provider")
        out = decode_response_body(rest)
        if out.shape != wire.shape:
            raise RuntimeError(f"provider returned dims {out.shape}, expected {wire.shape}")
        if is_complex:
            return wire_to_complex(out).astype(np.complex128)
        return out.astype(np.float64)

    def close(self):
        if self._proc.poll() is None:
            self._proc.stdin.close()
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass
