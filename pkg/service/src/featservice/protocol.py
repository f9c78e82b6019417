"""Binary wire format: fixed 4-byte magics, little-endian u32 dimensions,
float32 channel-last payloads. Dimensions imply payload length, so frames
carry no separate length prefix."""

import struct

import numpy as np

from .errors import ProtocolError

MAGIC_REQUEST = b"MLFQ"
MAGIC_RESPONSE = b"MLFR"
MAGIC_ERROR = b"MLFE"

ERR_BAD_MAGIC = 1
ERR_BAD_DIMS = 2
ERR_INFERENCE = 3

U32 = struct.Struct("<I")
DIMS = struct.Struct("<III")


def pack_request(pixels) -> bytes:
    """Request frame for an uint8 (height, width, 3) pixel array."""
    pixels = np.ascontiguousarray(pixels, dtype=np.uint8)
    h, w, c = pixels.shape
    return MAGIC_REQUEST + DIMS.pack(w, h, c) + pixels.tobytes()


def pack_response(layers) -> bytes:
    """Response frame for a list of (v, h, d) float arrays, in order."""
    parts = [MAGIC_RESPONSE, U32.pack(len(layers))]
    for arr in layers:
        arr = np.ascontiguousarray(arr, dtype="<f4")
        v, h, d = arr.shape
        parts.append(DIMS.pack(v, h, d))
        parts.append(arr.tobytes())
    return b"".join(parts)


def pack_error(code: int) -> bytes:
    return MAGIC_ERROR + U32.pack(code)


class _Reader:
    def __init__(self, buf):
        self.buf = buf
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.buf):
            raise ProtocolError(
                f"frame truncated: wanted {n} bytes at offset {self.pos}, "
                f"have {len(self.buf) - self.pos}"
            )
        out = self.buf[self.pos : self.pos + n]
        self.pos += n
        return out


def parse_response(buf):
    """Parse one server frame. Returns ("response", [arrays]) or
    ("error", code); raises ProtocolError on anything else."""
    r = _Reader(buf)
    magic = r.take(4)
    if magic == MAGIC_ERROR:
        (code,) = U32.unpack(r.take(4))
        return "error", code
    if magic != MAGIC_RESPONSE:
        raise ProtocolError(f"bad magic {magic!r}")
    (k,) = U32.unpack(r.take(4))
    layers = []
    for _ in range(k):
        v, h, d = DIMS.unpack(r.take(12))
        raw = r.take(v * h * d * 4)
        layers.append(np.frombuffer(raw, dtype="<f4").reshape(v, h, d))
    if r.pos != len(buf):
        raise ProtocolError(f"{len(buf) - r.pos} trailing bytes after frame")
    return "response", layers
