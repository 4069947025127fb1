"""In-memory raster images and the binary PGM/PPM codec.

Pixels live in floating point on the 0-255 scale for the whole pipeline;
quantization to 8 bits happens only when a file is encoded.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from blurmm.errors import PnmFormatError

# ITU-R 601 luma weights.
_LUMA = np.array([0.299, 0.587, 0.114])


@dataclass
class Raster:
    """A grayscale or RGB image with float64 pixel values on the 0-255 scale.

    ``data`` has shape ``(height, width)`` for grayscale and
    ``(height, width, 3)`` for RGB (channel-interleaved).
    """

    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim == 2:
            pass
        elif arr.ndim == 3 and arr.shape[2] == 3:
            pass
        else:
            raise ValueError(f"raster shape {arr.shape} is not (h, w) or (h, w, 3)")
        if arr.size and not np.all(np.isfinite(arr)):
            raise ValueError("raster contains non-finite pixel values")
        self.data = arr

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.data.ndim == 2 else 3

    def copy(self) -> "Raster":
        return Raster(self.data.copy())


def to_grayscale(raster: Raster) -> Raster:
    """Collapse RGB to a single luma channel; grayscale passes through unchanged."""
    if raster.channels == 1:
        return raster
    return Raster(raster.data @ _LUMA)


def quantize(values: np.ndarray) -> np.ndarray:
    """Clamp to [0, 255] and round half away from zero to uint8."""
    clipped = np.clip(values, 0.0, 255.0)
    return np.floor(clipped + 0.5).astype(np.uint8)


class _Tokenizer:
    """Pulls whitespace-separated header tokens, honouring '#' comments."""

    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def _skip_filler(self):
        while self.pos < len(self.buf):
            c = self.buf[self.pos]
            if c in b" \t\r\n\x0b\x0c":
                self.pos += 1
            elif c == ord("#"):
                nl = self.buf.find(b"\n", self.pos)
                self.pos = len(self.buf) if nl < 0 else nl + 1
            else:
                return

    def token(self, name: str) -> bytes:
        self._skip_filler()
        start = self.pos
        while self.pos < len(self.buf) and self.buf[self.pos] not in b" \t\r\n\x0b\x0c#":
            self.pos += 1
        if self.pos == start:
            raise PnmFormatError(f"missing header field: {name}")
        return self.buf[start:self.pos]

    def integer(self, name: str) -> int:
        tok = self.token(name)
        try:
            return int(tok)
        except ValueError:
            raise PnmFormatError(f"non-integer {name}: {tok!r}") from None

    def payload(self, n: int) -> bytes:
        # Exactly one whitespace byte separates maxval from the raster data.
        if self.pos >= len(self.buf) or self.buf[self.pos] not in b" \t\r\n\x0b\x0c":
            raise PnmFormatError("missing whitespace before pixel data")
        self.pos += 1
        data = self.buf[self.pos:self.pos + n]
        if len(data) < n:
            raise PnmFormatError(f"truncated payload: expected {n} bytes, got {len(data)}")
        return data


def decode_pnm(buf: bytes) -> Raster:
    """Decode a binary PGM (P5) or PPM (P6) byte stream, 8-bit maxval 255."""
    tok = _Tokenizer(buf)
    magic = tok.token("magic")
    if magic == b"P5":
        channels = 1
    elif magic == b"P6":
        channels = 3
    else:
        raise PnmFormatError(f"unsupported magic: {magic!r} (want P5 or P6)")
    width = tok.integer("width")
    height = tok.integer("height")
    if width <= 0 or height <= 0:
        raise PnmFormatError(f"non-positive dimensions: {width}x{height}")
    maxval = tok.integer("maxval")
    if maxval != 255:
        raise PnmFormatError(f"unsupported maxval: {maxval} (want 255)")
    raw = tok.payload(width * height * channels)
    arr = np.frombuffer(raw, dtype=np.uint8).astype(np.float64)
    if channels == 1:
        arr = arr.reshape(height, width)
    else:
        arr = arr.reshape(height, width, 3)
    return Raster(arr)


def encode_pnm(raster: Raster) -> bytes:
    """Encode as binary PGM/PPM with the canonical header."""
    magic = "P5" if raster.channels == 1 else "P6"
    header = f"{magic}\n{raster.width} {raster.height}\n255\n".encode("ascii")
    return header + quantize(raster.data).tobytes()


def read_pnm(path) -> Raster:
    with open(path, "rb") as fh:
        return decode_pnm(fh.read())


def write_pnm(path, raster: Raster) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_pnm(raster))
