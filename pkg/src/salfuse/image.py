"""Planar floating-point raster model and exact elementwise arithmetic.

Every stage of the fusion pipeline trades in :class:`Image` values:
float64 samples, nominally in [0, 1], stored as one plane per channel.
Intermediate results (detail layers, signed differences) may leave
[0, 1]; values are clamped only on export to bytes, never in between.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ShapeMismatchError

# A single channel: 2-D float64 array indexed [row, column].
Plane = np.ndarray


@dataclass(frozen=True)
class Image:
    """Immutable planar raster with shape (channels, height, width).

    The constructor coerces to a contiguous float64 array and freezes it
    (read-only); callers must not mutate the array afterwards.  Channel
    count is restricted to 1 (grayscale) or 3 (RGB), and every sample
    must be finite.
    """

    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.ascontiguousarray(self.data, dtype=np.float64)
        if data.ndim != 3:
            raise ShapeMismatchError(
                f"expected a (channels, height, width) array, got shape {data.shape}"
            )
        channels, height, width = data.shape
        if channels not in (1, 3):
            raise ShapeMismatchError(f"channel count must be 1 or 3, got {channels}")
        if height < 1 or width < 1:
            raise ShapeMismatchError(f"empty raster: {width}x{height}")
        if not np.isfinite(data).all():
            raise ParameterError("image samples must be finite (no NaN or Inf)")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    def plane(self, channel: int) -> Plane:
        """Read-only view of one channel."""
        return self.data[channel]


def image_from_bytes(raw: bytes, width: int, height: int, channels: int) -> Image:
    """Decode 8-bit interleaved samples (row-major, channel-fastest) to planes.

    Each byte b maps to the float sample b / 255, so 0 -> 0.0 and
    255 -> 1.0 exactly.
    """
    if channels not in (1, 3):
        raise ParameterError(f"channel count must be 1 or 3, got {channels}")
    if width < 1 or height < 1:
        raise ParameterError(f"invalid dimensions {width}x{height}")
    expected = width * height * channels
    if len(raw) != expected:
        raise ShapeMismatchError(
            f"got {len(raw)} bytes, expected {expected} for {width}x{height}x{channels}"
        )
    interleaved = np.frombuffer(raw, dtype=np.uint8).reshape(height, width, channels)
    planes = interleaved.transpose(2, 0, 1).astype(np.float64) / 255.0
    return Image(planes)


def quantize(image: Image, depth: int = 8) -> np.ndarray:
    """Clamp to [0, 1] and quantize to an interleaved (H, W, C) integer array.

    Rounding is half away from zero: q = floor(v * scale + 0.5).  The
    image's own samples are left untouched.
    """
    if depth == 8:
        scale, dtype = 255.0, np.uint8
    elif depth == 16:
        scale, dtype = 65535.0, np.uint16
    else:
        raise ParameterError(f"bit depth must be 8 or 16, got {depth}")
    clamped = np.clip(image.data, 0.0, 1.0)
    levels = np.floor(clamped * scale + 0.5).astype(dtype)
    return levels.transpose(1, 2, 0)


def image_to_bytes(image: Image, depth: int = 8) -> bytes:
    """Export as raw interleaved samples at the given bit depth.

    16-bit samples are emitted in native byte order; see quantize() for
    the clamping and rounding rules.
    """
    return quantize(image, depth).tobytes()


def elementwise(a: Image, b: Image, op: str) -> Image:
    """Per-sample arithmetic on two images of identical shape.

    op is one of "add", "sub", "mul".  No clamping: results may leave
    [0, 1], which is what the detail layers rely on.
    """
    if a.shape != b.shape:
        raise ShapeMismatchError(f"operand shapes differ: {a.shape} vs {b.shape}")
    if op == "add":
        out = a.data + b.data
    elif op == "sub":
        out = a.data - b.data
    elif op == "mul":
        out = a.data * b.data
    else:
        raise ParameterError(f"unknown elementwise op {op!r}")
    return Image(out)
