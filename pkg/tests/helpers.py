"""Shared builders for synthetic frames, files and streams."""

from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from salfuse import Image


def save_gray_png(path: Path, values: np.ndarray) -> None:
    PILImage.fromarray(values.astype(np.uint8), mode="L").save(path)


def save_rgb_png(path: Path, values: np.ndarray) -> None:
    PILImage.fromarray(values.astype(np.uint8), mode="RGB").save(path)


def write_y4m(
    path: Path,
    y_frames: list[np.ndarray],
    cb_frames: list[np.ndarray] | None = None,
    cr_frames: list[np.ndarray] | None = None,
    colorspace: str = "C420",
    header_extra: str = " F25:1 Ip A1:1",
    frame_params: str = "",
) -> Path:
    """Assemble a Y4M file from uint8 planes; chroma defaults to neutral 128."""
    h, w = y_frames[0].shape
    factors = {"C420": (2, 2), "C420jpeg": (2, 2), "C422": (1, 2), "C444": (1, 1)}
    fy, fx = factors[colorspace]
    ch, cw = h // fy, w // fx
    with open(path, "wb") as fp:
        fp.write(f"YUV4MPEG2 W{w} H{h}{header_extra} {colorspace}\n".encode("ascii"))
        for i, y in enumerate(y_frames):
            cb = cb_frames[i] if cb_frames else np.full((ch, cw), 128, dtype=np.uint8)
            cr = cr_frames[i] if cr_frames else np.full((ch, cw), 128, dtype=np.uint8)
            fp.write(f"FRAME{frame_params}\n".encode("ascii"))
            fp.write(y.astype(np.uint8).tobytes())
            fp.write(cb.astype(np.uint8).tobytes())
            fp.write(cr.astype(np.uint8).tobytes())
    return path


class ListStream:
    """In-memory FrameStream stand-in for tests that don't need files."""

    def __init__(self, frames: list[Image], path: str = "<memory>") -> None:
        self.path = path
        self._frames = frames
        if frames:
            self.width = frames[0].width
            self.height = frames[0].height
            self.channels = frames[0].channels
        else:
            self.width = self.height = self.channels = 0
        self.frame_count = len(frames)

    def frames(self):
        return iter(self._frames)


def random_image(rng: np.random.Generator, channels: int, height: int, width: int) -> Image:
    return Image(rng.random((channels, height, width)))


def moving_square_frames(
    count: int = 20,
    size: int = 64,
    square: int = 12,
    step: int = 2,
    background: float = 0.1,
    brightness: float = 0.95,
) -> list[Image]:
    """Bright square sweeping left to right over a dark background."""
    frames = []
    top = size // 2 - square // 2
    for k in range(count):
        plane = np.full((1, size, size), background)
        left = 6 + step * k
        plane[0, top : top + square, left : left + square] = brightness
        frames.append(Image(plane))
    return frames


def assert_within_ulp(actual: np.ndarray, expected: np.ndarray, ulps: int = 1) -> None:
    """Per-sample |actual - expected| <= ulps rounding steps at that magnitude."""
    tol = ulps * np.spacing(np.maximum(np.abs(actual), np.abs(expected)))
    diff = np.abs(actual - expected)
    assert np.all(diff <= tol), f"max diff {diff.max()} exceeds {ulps} ulp"


# Frozen from the pre-build reference run: 64x64 Gaussian blob (sigma 6,
# 8-bit scale) shifted right by one pixel, alpha=1, 100 iterations,
# measured over the blob support (> 0.1 * max).
SHIFT_MEAN_U = 0.7624397328700946
SHIFT_MEAN_ABS_V = 0.14923445083474354


def shifted_blob_pair() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gaussian blob, the same blob moved one pixel right, and its support."""
    yy, xx = np.mgrid[0:64, 0:64].astype(np.float64)
    blob = 255.0 * np.exp(-(((yy - 31.5) ** 2 + (xx - 31.5) ** 2) / (2 * 6.0**2)))
    moved = np.empty_like(blob)
    moved[:, 1:] = blob[:, :-1]
    moved[:, 0] = blob[:, 0]
    support = blob > 0.1 * blob.max()
    return blob, moved, support
