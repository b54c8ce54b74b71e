"""Frame ingestion: image-sequence directories and uncompressed Y4M video.

A video enters the pipeline as two co-registered sources: its first
frame and the temporal average of all frames (frame 0 included).
Directory streams decode PNG/JPEG/PGM/PPM files in byte-wise
lexicographic name order; Y4M streams decode planar 4:2:0 / 4:2:2 /
4:4:4 YCbCr frames to full-range BT.601 RGB.  Streams are re-readable:
every frames() call decodes from the start.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path
from typing import Iterator

import numpy as np
from PIL import Image as PILImage

from .errors import (
    FormatError,
    InconsistentFramesError,
    NoFramesError,
    ParameterError,
)
from .image import Image, quantize

RASTER_EXTENSIONS = frozenset({".png", ".jpg", ".jpeg", ".pgm", ".ppm"})

_Y4M_MAGIC = b"YUV4MPEG2"

# Nearest-neighbor upsampling factors (rows, cols) per colorspace.
_CHROMA_FACTORS = {"420": (2, 2), "422": (1, 2), "444": (1, 1)}


def _channels_for_mode(mode: str) -> int:
    return 1 if mode in ("1", "L") else 3


def load_image(path: Path | str) -> Image:
    """Decode one raster file; grayscale stays 1-channel, all else becomes RGB."""
    with PILImage.open(path) as im:
        if _channels_for_mode(im.mode) == 1:
            arr = np.asarray(im.convert("L"), dtype=np.uint8)
            planes = arr[np.newaxis].astype(np.float64) / 255.0
        else:
            arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
            planes = arr.transpose(2, 0, 1).astype(np.float64) / 255.0
    return Image(planes)


def _png_chunk(tag: bytes, payload: bytes) -> bytes:
    return (
        struct.pack(">I", len(payload))
        + tag
        + payload
        + struct.pack(">I", zlib.crc32(tag + payload))
    )


def _write_png16(path: Path, samples: np.ndarray) -> None:
    """Minimal 16-bit PNG writer (filter 0 rows, one zlib stream).

    Pillow cannot emit 16-bit RGB PNGs, so these few chunks are built by
    hand.  samples is (H, W) or (H, W, 3) uint16.
    """
    height, width = samples.shape[:2]
    color_type = 0 if samples.ndim == 2 else 2
    header = struct.pack(">IIBBBBB", width, height, 16, color_type, 0, 0, 0)
    rows = samples.astype(">u2").reshape(height, -1)
    raw = b"".join(b"\x00" + rows[y].tobytes() for y in range(height))
    path.write_bytes(
        b"\x89PNG\r\n\x1a\n"
        + _png_chunk(b"IHDR", header)
        + _png_chunk(b"IDAT", zlib.compress(raw, 6))
        + _png_chunk(b"IEND", b"")
    )


def save_image(path: Path | str, image: Image, depth: int = 8) -> None:
    """Quantize and write an image file; format is chosen by extension.

    depth 16 is PNG only.  Quantization clamps to [0, 1] and rounds
    half away from zero.
    """
    path = Path(path)
    samples = quantize(image, depth)
    if samples.shape[2] == 1:
        samples = samples[:, :, 0]
    if depth == 8:
        PILImage.fromarray(samples).save(path)
    else:
        if path.suffix.lower() != ".png":
            raise ParameterError(f"16-bit export requires a .png path, got {path.name!r}")
        _write_png16(path, samples)


class FrameStream:
    """Re-readable, fixed-geometry frame sequence.

    Attributes: path, width, height, channels, frame_count.  Subclasses
    implement frames(); decoding the same stream twice yields
    bit-identical frames.
    """

    path: Path
    width: int
    height: int
    channels: int
    frame_count: int

    def frames(self) -> Iterator[Image]:
        raise NotImplementedError


class DirectoryStream(FrameStream):
    """Frames stored as one raster file each, ordered by file name."""

    def __init__(self, path: Path) -> None:
        names = sorted(
            entry.name
            for entry in path.iterdir()
            if entry.is_file() and entry.suffix.lower() in RASTER_EXTENSIONS
        )
        if not names:
            raise NoFramesError(f"no decodable frames in {path}")
        self.path = path
        self._names = names
        first = path / names[0]
        with PILImage.open(first) as im:
            self.width, self.height = im.size
            self.channels = _channels_for_mode(im.mode)
        for name in names[1:]:
            with PILImage.open(path / name) as im:
                if im.size != (self.width, self.height):
                    raise InconsistentFramesError(
                        f"{name} is {im.size[0]}x{im.size[1]},"
                        f" expected {self.width}x{self.height}"
                    )
                if _channels_for_mode(im.mode) != self.channels:
                    raise InconsistentFramesError(
                        f"{name} has {_channels_for_mode(im.mode)} channel(s),"
                        f" expected {self.channels}"
                    )
        self.frame_count = len(names)

    def frames(self) -> Iterator[Image]:
        for name in self._names:
            yield load_image(self.path / name)


def _read_line(fp, what: str, eof_ok: bool = False, limit: int = 2048) -> bytes | None:
    """Read bytes up to a newline (newline consumed, not returned)."""
    buf = bytearray()
    while True:
        byte = fp.read(1)
        if not byte:
            if eof_ok and not buf:
                return None
            raise FormatError(f"unterminated {what}")
        if byte == b"\n":
            return bytes(buf)
        buf += byte
        if len(buf) > limit:
            raise FormatError(f"{what} exceeds {limit} bytes")


def _parse_y4m_header(line: bytes) -> tuple[int, int, str]:
    parts = line.split(b" ")
    if parts[0] != _Y4M_MAGIC:
        raise FormatError("missing YUV4MPEG2 signature")
    width = height = None
    colorspace = "420"
    for token in parts[1:]:
        if not token:
            continue
        tag, value = token[:1], token[1:]
        try:
            if tag == b"W":
                width = int(value)
            elif tag == b"H":
                height = int(value)
            elif tag == b"C":
                colorspace = value.decode("ascii")
            # F (rate), I (interlace), A (aspect), X (comment) don't
            # affect decoding and are accepted as-is.
        except (ValueError, UnicodeDecodeError) as exc:
            raise FormatError(f"bad header parameter {token!r}") from exc
    if width is None or height is None or width < 1 or height < 1:
        raise FormatError("header must carry positive W and H parameters")
    if colorspace.startswith("420"):
        colorspace = "420"  # 420jpeg/420mpeg2/420paldv share the layout
    if colorspace not in _CHROMA_FACTORS:
        raise FormatError(f"unsupported colorspace C{colorspace}")
    fy, fx = _CHROMA_FACTORS[colorspace]
    if width % fx or height % fy:
        raise FormatError(
            f"{width}x{height} is not divisible by the C{colorspace} subsampling"
        )
    return width, height, colorspace


class Y4MStream(FrameStream):
    """Uncompressed YUV4MPEG2 video file; always decodes to 3-channel RGB."""

    def __init__(self, path: Path) -> None:
        self.path = path
        with open(path, "rb") as fp:
            self.width, self.height, self._colorspace = _parse_y4m_header(
                _read_line(fp, "stream header")
            )
            count = 0
            size = self._frame_size()
            while True:
                marker = _read_line(fp, "frame marker", eof_ok=True)
                if marker is None:
                    break
                if not marker.startswith(b"FRAME"):
                    raise FormatError(f"expected FRAME marker, got {marker[:16]!r}")
                payload = fp.read(size)
                if len(payload) < size:
                    raise FormatError(
                        f"truncated frame {count}: {len(payload)} of {size} bytes"
                    )
                count += 1
        if count == 0:
            raise NoFramesError(f"no frames in {path}")
        self.channels = 3
        self.frame_count = count

    def _frame_size(self) -> int:
        fy, fx = _CHROMA_FACTORS[self._colorspace]
        luma = self.width * self.height
        chroma = (self.width // fx) * (self.height // fy)
        return luma + 2 * chroma

    def _decode_frame(self, payload: bytes) -> Image:
        fy, fx = _CHROMA_FACTORS[self._colorspace]
        w, h = self.width, self.height
        cw, ch = w // fx, h // fy
        planes = np.frombuffer(payload, dtype=np.uint8)
        y = planes[: w * h].reshape(h, w).astype(np.float64)
        cb = planes[w * h : w * h + cw * ch].reshape(ch, cw).astype(np.float64)
        cr = planes[w * h + cw * ch :].reshape(ch, cw).astype(np.float64)
        if (fy, fx) != (1, 1):
            cb = np.repeat(np.repeat(cb, fy, axis=0), fx, axis=1)
            cr = np.repeat(np.repeat(cr, fy, axis=0), fx, axis=1)
        cb -= 128.0
        cr -= 128.0
        # Full-range BT.601
        r = y + 1.402 * cr
        g = y - 0.344136 * cb - 0.714136 * cr
        b = y + 1.772 * cb
        rgb = np.clip(np.stack((r, g, b)) / 255.0, 0.0, 1.0)
        return Image(rgb)

    def frames(self) -> Iterator[Image]:
        size = self._frame_size()
        with open(self.path, "rb") as fp:
            _read_line(fp, "stream header")
            index = 0
            while True:
                marker = _read_line(fp, "frame marker", eof_ok=True)
                if marker is None:
                    return
                payload = fp.read(size)
                if len(payload) < size:
                    raise FormatError(
                        f"truncated frame {index}: {len(payload)} of {size} bytes"
                    )
                yield self._decode_frame(payload)
                index += 1


def open_stream(path: Path | str, kind: str = "auto") -> FrameStream:
    """Open a frame source: a directory of rasters or a Y4M file.

    kind "auto" resolves by path type (directory vs file); "directory"
    and "y4m" force the interpretation.
    """
    path = Path(path)
    if kind == "auto":
        kind = "directory" if path.is_dir() else "y4m"
    if kind == "directory":
        if not path.is_dir():
            raise FileNotFoundError(f"not a directory: {path}")
        return DirectoryStream(path)
    if kind == "y4m":
        if not path.is_file():
            raise FileNotFoundError(f"no such file: {path}")
        return Y4MStream(path)
    raise ParameterError(f"unknown stream kind {kind!r}")


class Accumulator:
    """Running per-sample sum in extended precision, fixed frame order.

    Accumulating in long double keeps hundreds of float64 frames exact
    enough that the final mean is insensitive to frame count.
    """

    def __init__(self) -> None:
        self._sum: np.ndarray | None = None
        self.frames_seen = 0

    def add(self, frame: Image) -> None:
        if self._sum is None:
            self._sum = frame.data.astype(np.longdouble)
        else:
            if frame.shape != self._sum.shape:
                raise InconsistentFramesError(
                    f"frame shape {frame.shape} does not match {self._sum.shape}"
                )
            self._sum += frame.data
        self.frames_seen += 1

    def mean(self) -> Image:
        if self._sum is None:
            raise NoFramesError("no frames accumulated")
        return Image((self._sum / self.frames_seen).astype(np.float64))


def first_frame(stream: FrameStream) -> Image:
    """Frame 0 of the stream, decoded exactly as stored."""
    for frame in stream.frames():
        return frame
    raise NoFramesError(f"no frames in {stream.path}")


def temporal_average(stream: FrameStream) -> Image:
    """Per-pixel, per-channel mean over every frame in order."""
    acc = Accumulator()
    for frame in stream.frames():
        acc.add(frame)
    return acc.mean()


def build_sources(stream: FrameStream) -> tuple[Image, Image]:
    """The two fusion sources in one decode pass: (first frame, temporal average).

    A single-frame stream yields two bit-identical sources.
    """
    first: Image | None = None
    acc = Accumulator()
    for frame in stream.frames():
        if first is None:
            first = frame
        acc.add(frame)
    if first is None:
        raise NoFramesError(f"no frames in {stream.path}")
    return first, acc.mean()
