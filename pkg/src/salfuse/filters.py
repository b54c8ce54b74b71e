"""Gaussian, Laplacian-of-Gaussian and Wiener filters.

Separable Gaussian smoothing and the 5-point Laplacian drive the
edge-activity measure; the Wiener filter (locally adaptive by default,
or a literal frequency-domain variant) provides the denoised view used
both as the base layer and inside the saliency measure.  All spatial
filters handle borders by edge replication, and every operation runs
single-threaded with a fixed accumulation order so results are
bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ParameterError, ShapeMismatchError
from .image import Image, Plane

ADAPTIVE = "spatial-adaptive"
FREQUENCY = "frequency-domain"

# Below this, a local signal estimate is treated as pure noise.
_VARIANCE_FLOOR = 1e-12


class Kernel1D(NamedTuple):
    """Symmetric odd-length 1-D filter kernel."""

    taps: np.ndarray
    radius: int


@dataclass(frozen=True)
class FilterConfig:
    """Free parameters of the decomposition and saliency filters.

    log_sigma is the Gaussian scale used for smoothing before the
    Laplacian; wiener_window is the odd side length of the local-stats
    neighborhood; wiener_noise_variance of None means "estimate from the
    image" (mean of the local variances, per plane).  added_noise_sigma
    injects seeded Gaussian noise before Wiener filtering, for denoising
    experiments; 0.0 leaves the input untouched.
    """

    log_sigma: float = 2.0
    wiener_window: int = 5
    wiener_noise_variance: float | None = None
    added_noise_sigma: float = 0.0
    wiener_mode: str = ADAPTIVE
    noise_seed: int = 0

    def __post_init__(self) -> None:
        if self.log_sigma <= 0.0:
            raise ParameterError(f"log_sigma must be positive, got {self.log_sigma}")
        if self.wiener_window < 3 or self.wiener_window % 2 == 0:
            raise ParameterError(
                f"wiener_window must be an odd integer >= 3, got {self.wiener_window}"
            )
        if self.wiener_noise_variance is not None and self.wiener_noise_variance < 0.0:
            raise ParameterError("wiener_noise_variance must be non-negative or None")
        if self.added_noise_sigma < 0.0:
            raise ParameterError("added_noise_sigma must be non-negative")
        if self.wiener_mode not in (ADAPTIVE, FREQUENCY):
            raise ParameterError(
                f"wiener_mode must be {ADAPTIVE!r} or {FREQUENCY!r}, got {self.wiener_mode!r}"
            )


def gaussian_kernel(sigma: float) -> Kernel1D:
    """Sampled Gaussian with radius ceil(3*sigma), normalized to sum 1.

    Taps at mirrored offsets are computed from the same squared offset,
    so the kernel is symmetric to the last bit.
    """
    if sigma <= 0.0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    taps = np.exp(-(offsets * offsets) / (2.0 * sigma * sigma))
    taps /= taps.sum()
    return Kernel1D(taps=taps, radius=radius)


def _convolve_axis(plane: Plane, kernel: Kernel1D, axis: int) -> Plane:
    """1-D convolution along one axis with edge replication.

    Taps are accumulated in ascending index order; with a symmetric
    kernel, convolution and correlation coincide.
    """
    radius = kernel.radius
    pad = [(0, 0), (0, 0)]
    pad[axis] = (radius, radius)
    padded = np.pad(plane, pad, mode="edge")
    length = plane.shape[axis]
    out = np.zeros_like(plane)
    for i, tap in enumerate(kernel.taps):
        if axis == 0:
            out += tap * padded[i : i + length, :]
        else:
            out += tap * padded[:, i : i + length]
    return out


def convolve_separable(plane: Plane, kernel: Kernel1D) -> Plane:
    """Convolve a plane with kernel x kernel: horizontal pass, then vertical."""
    if plane.ndim != 2:
        raise ShapeMismatchError(f"expected a 2-D plane, got shape {plane.shape}")
    return _convolve_axis(_convolve_axis(plane, kernel, axis=1), kernel, axis=0)


def convolve_naive(plane: Plane, kernel2d: np.ndarray) -> Plane:
    """Direct 2-D convolution with edge replication, one window per pixel.

    O(n^2 k^2) and deliberately structure-free; exists as the slow
    cross-check for the separable path, for small planes only.
    """
    if plane.ndim != 2:
        raise ShapeMismatchError(f"expected a 2-D plane, got shape {plane.shape}")
    kernel2d = np.asarray(kernel2d, dtype=np.float64)
    if kernel2d.ndim != 2 or kernel2d.shape[0] % 2 == 0 or kernel2d.shape[1] % 2 == 0:
        raise ParameterError(f"kernel must be 2-D with odd sides, got {kernel2d.shape}")
    ry, rx = kernel2d.shape[0] // 2, kernel2d.shape[1] // 2
    padded = np.pad(plane, ((ry, ry), (rx, rx)), mode="edge")
    out = np.empty_like(plane)
    height, width = plane.shape
    for y in range(height):
        for x in range(width):
            window = padded[y : y + 2 * ry + 1, x : x + 2 * rx + 1]
            out[y, x] = float((window * kernel2d).sum())
    return out


def laplacian5(plane: Plane) -> Plane:
    """5-point discrete Laplacian (center -4, axial neighbors +1), edge replicated."""
    padded = np.pad(plane, 1, mode="edge")
    return (
        padded[:-2, 1:-1]
        + padded[2:, 1:-1]
        + padded[1:-1, :-2]
        + padded[1:-1, 2:]
        - 4.0 * plane
    )


def gaussian_blur(image: Image, sigma: float) -> Image:
    """Separable Gaussian smoothing of every channel."""
    kernel = gaussian_kernel(sigma)
    out = np.empty_like(image.data)
    for c in range(image.channels):
        out[c] = convolve_separable(image.data[c], kernel)
    return Image(out)


def log_filter(image: Image, sigma: float) -> Image:
    """Laplacian of Gaussian: smooth at scale sigma, then apply the 5-point Laplacian.

    Output is signed and roughly zero-mean; flat regions map to (near)
    zero, edges to zero crossings flanked by opposite-sign lobes.
    """
    kernel = gaussian_kernel(sigma)
    out = np.empty_like(image.data)
    for c in range(image.channels):
        out[c] = laplacian5(convolve_separable(image.data[c], kernel))
    return Image(out)


def _box_mean(plane: Plane, window: int) -> Plane:
    """Mean over a window x window neighborhood, clamped at the borders.

    Border clamping factorizes per axis, so the two-pass sum below is
    exactly the replicated 2-D window mean.
    """
    radius = window // 2
    height, width = plane.shape
    padded = np.pad(plane, ((radius, radius), (0, 0)), mode="edge")
    cols = np.zeros_like(plane)
    for dy in range(window):
        cols += padded[dy : dy + height, :]
    padded = np.pad(cols, ((0, 0), (radius, radius)), mode="edge")
    acc = np.zeros_like(plane)
    for dx in range(window):
        acc += padded[:, dx : dx + width]
    return acc / float(window * window)


def _local_stats(plane: Plane, window: int) -> tuple[Plane, Plane]:
    """Per-pixel mean and (non-negative) variance over the local window."""
    mean = _box_mean(plane, window)
    sqmean = _box_mean(plane * plane, window)
    return mean, np.maximum(sqmean - mean * mean, 0.0)


def _with_noise(image: Image, cfg: FilterConfig) -> Image:
    """Seeded Gaussian noise injection; the identity when sigma is zero."""
    if cfg.added_noise_sigma <= 0.0:
        return image
    rng = np.random.default_rng(cfg.noise_seed)
    noise = rng.normal(0.0, cfg.added_noise_sigma, size=image.shape)
    return Image(image.data + noise)


def _wiener_plane(plane: Plane, window: int, noise_variance: float | None) -> Plane:
    mean, var = _local_stats(plane, window)
    nu2 = float(var.mean()) if noise_variance is None else float(noise_variance)
    denom = np.maximum(var, nu2)
    # Degenerate neighborhoods (both estimates ~ 0) fall back to the mean.
    flat = denom < _VARIANCE_FLOOR
    gain = np.where(flat, 0.0, np.maximum(var - nu2, 0.0) / np.where(flat, 1.0, denom))
    return mean + gain * (plane - mean)


def wiener_adaptive(image: Image, cfg: FilterConfig) -> Image:
    """Locally adaptive Wiener denoising.

    Per pixel: out = mu + max(var - nu2, 0) / max(var, nu2) * (x - mu),
    with mu and var taken over the wiener_window neighborhood and nu2
    either fixed by the config or estimated per plane as the mean local
    variance.  The gain lies in [0, 1]: flat regions collapse to their
    local mean, strong structure passes through.
    """
    noisy = _with_noise(image, cfg)
    out = np.empty_like(noisy.data)
    for c in range(noisy.channels):
        out[c] = _wiener_plane(noisy.data[c], cfg.wiener_window, cfg.wiener_noise_variance)
    return Image(out)


def _wiener_freq_plane(plane: Plane, window: int, noise_variance: float | None) -> Plane:
    if noise_variance is None:
        _, var = _local_stats(plane, window)
        nu2 = float(var.mean())
    else:
        nu2 = float(noise_variance)
    spectrum = np.fft.fft2(plane)
    height, width = plane.shape
    power = (spectrum.real * spectrum.real + spectrum.imag * spectrum.imag) / (
        height * width
    )
    signal = np.maximum(power - nu2, 0.0)
    denom = signal + nu2
    nonzero = denom > 0.0
    # All-zero denominator only happens at nu2 = 0 on dead coefficients;
    # pass those through unchanged.
    gain = np.where(nonzero, signal / np.where(nonzero, denom, 1.0), 1.0)
    return np.fft.ifft2(spectrum * gain).real


def wiener_frequency(image: Image, cfg: FilterConfig) -> Image:
    """Frequency-domain Wiener filter with a flat noise-power model.

    Gain per coefficient is Ps / (Ps + nu2) where Ps is the periodogram
    signal estimate max(|F|^2 / (W*H) - nu2, 0).  With nu2 = 0 the gain
    is identically 1 and the filter reduces to a transform round trip.
    """
    noisy = _with_noise(image, cfg)
    out = np.empty_like(noisy.data)
    for c in range(noisy.channels):
        out[c] = _wiener_freq_plane(
            noisy.data[c], cfg.wiener_window, cfg.wiener_noise_variance
        )
    return Image(out)


def apply_wiener(image: Image, cfg: FilterConfig) -> Image:
    """Run the Wiener realization selected by cfg.wiener_mode."""
    if cfg.wiener_mode == FREQUENCY:
        return wiener_frequency(image, cfg)
    return wiener_adaptive(image, cfg)
