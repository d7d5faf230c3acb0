import io
import struct
import sys
from pathlib import Path

import numpy as np
import pytest

from hrecon.bridge import (
    ExternalProcessScore,
    complex_to_wire,
    encode_request,
    encode_response,
    read_frame,
    wire_to_complex,
)
from hrecon.sde import gaussian_score

STUB = Path(__file__).parent / "score_server_stub.py"


def stub_cmd(*args):
    return [sys.executable, str(STUB), *args]


class TestCodec:
    def test_complex_wire_round_trip(self):
        rng = np.random.default_rng(0)
        x = (rng.standard_normal((3, 4, 5)) + 1j * rng.standard_normal((3, 4, 5))).astype(
            np.complex64
        )
        wire = complex_to_wire(x)
        assert wire.shape == (3, 4, 10)
        assert wire.dtype == np.float32
        assert np.array_equal(wire_to_complex(wire), x)

    def test_request_frame_layout(self):
        x = np.arange(6, dtype=np.float32).reshape(1, 2, 3)
        frame = encode_request(x, 0.25)
        (length,) = struct.unpack("<I", frame[:4])
        assert length == len(frame) - 4 == 1 + 8 + 12 + 24
        assert frame[4] == 0x01
        assert struct.unpack("<d", frame[5:13])[0] == 0.25
        assert struct.unpack("<III", frame[13:25]) == (1, 2, 3)

    def test_read_frame_round_trip(self):
        x = np.ones((2, 2, 2), dtype=np.float32)
        stream = io.BytesIO(encode_response(x))
        kind, rest = read_frame(stream)
        assert kind == 0x02
        assert read_frame(stream) is None

    def test_read_frame_truncation(self):
        x = np.ones((2, 2, 2), dtype=np.float32)
        frame = encode_response(x)
        with pytest.raises(EOFError, match="inside a frame"):
            read_frame(io.BytesIO(frame[:-3]))


class TestExternalProvider:
    def test_echo_preserves_float32_exactly(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((4, 3, 2)).astype(np.float32).astype(np.float64)
        with ExternalProcessScore(stub_cmd("echo")) as score:
            out = score(x, 0.5)
        assert np.array_equal(out, x)

    def test_gauss_stub_matches_analytic(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((4, 4, 3))
        sd, sigma = 0.7, 0.3
        with ExternalProcessScore(stub_cmd("gauss", str(sd))) as score:
            out = score(x, sigma)
        want = gaussian_score(x, np.zeros_like(x), sd, sigma)
        assert np.max(np.abs(out - want)) <= 1e-5

    def test_complex_tensor_round_trip(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal((2, 3, 4)) + 1j * rng.standard_normal((2, 3, 4))
        with ExternalProcessScore(stub_cmd("gauss", "1.0")) as score:
            out = score(x, 0.2)
        want = gaussian_score(x, np.zeros_like(x), 1.0, 0.2)
        assert np.iscomplexobj(out)
        assert np.max(np.abs(out - want)) <= 1e-5

    def test_error_frame_raises(self):
        x = np.zeros((1, 1, 1))
        with ExternalProcessScore(stub_cmd("error")) as score:
            with pytest.raises(RuntimeError, match="stub error mode"):
                score(x, 0.1)

    def test_serves_many_requests(self):
        rng = np.random.default_rng(4)
        with ExternalProcessScore(stub_cmd("echo")) as score:
            for _ in range(20):
                x = rng.standard_normal((2, 2, 2)).astype(np.float32).astype(np.float64)
                assert np.array_equal(score(x, 0.1), x)

    def test_string_command_is_shlex_split(self):
        cmd = f"{sys.executable} {STUB} echo"
        with ExternalProcessScore(cmd) as score:
            out = score(np.zeros((1, 1, 1)), 0.1)
        assert out.shape == (1, 1, 1)
