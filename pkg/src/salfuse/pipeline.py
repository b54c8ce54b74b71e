"""Two-scale decomposition, saliency weighting, and fusion of two sources.

The fusion rule: split each source into base (smoothed) and detail
(residual) layers, fuse the details with per-pixel saliency weights,
average the bases, and add the two fused layers back together.  Saliency
is the per-pixel channel norm of the difference between a
Laplacian-of-Gaussian response and a Wiener-denoised view, so pixels
where a source carries distinctive structure dominate the detail sum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ParameterError, ShapeMismatchError
from .filters import FilterConfig, apply_wiener, gaussian_blur, log_filter
from .image import Image, Plane, elementwise

BASE_WIENER = "wiener"
BASE_GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class PipelineConfig:
    """Fusion parameters: filter settings, base-layer choice, tie epsilon.

    base_filter picks the smoother that defines the base layer: "wiener"
    (default, edge preserving) or "gaussian" (scale log_sigma).
    epsilon_tie is the threshold under which a saliency pair counts as a
    tie and both weights become 0.5.
    """

    filter: FilterConfig = field(default_factory=FilterConfig)
    base_filter: str = BASE_WIENER
    epsilon_tie: float = 1e-12

    def __post_init__(self) -> None:
        if self.base_filter not in (BASE_WIENER, BASE_GAUSSIAN):
            raise ParameterError(
                f"base_filter must be {BASE_WIENER!r} or {BASE_GAUSSIAN!r},"
                f" got {self.base_filter!r}"
            )
        if self.epsilon_tie <= 0.0:
            raise ParameterError(f"epsilon_tie must be positive, got {self.epsilon_tie}")


class Decomposition(NamedTuple):
    """Base plus detail; base + detail reproduces the source exactly."""

    base: Image
    detail: Image


class WeightMaps(NamedTuple):
    """Per-pixel convex weights for the two sources: w1 + w2 = 1."""

    w1: Plane
    w2: Plane


@dataclass(frozen=True)
class SummaryResult:
    """Fused image together with every intermediate, for inspection dumps."""

    source1: Image
    source2: Image
    base1: Image
    base2: Image
    detail1: Image
    detail2: Image
    saliency1: Plane
    saliency2: Plane
    weights: WeightMaps
    fused: Image


def _base_layer(source: Image, cfg: PipelineConfig) -> Image:
    if cfg.base_filter == BASE_GAUSSIAN:
        return gaussian_blur(source, cfg.filter.log_sigma)
    return apply_wiener(source, cfg.filter)


def decompose(source: Image, cfg: PipelineConfig) -> Decomposition:
    """Split a source into base (smoothed) and detail (source - base) layers.

    The detail layer is signed and unclamped, so composing the two
    layers reconstructs the source to within one rounding step.
    """
    base = _base_layer(source, cfg)
    return Decomposition(base=base, detail=elementwise(source, base, "sub"))


def _channel_norm(diff: np.ndarray) -> Plane:
    return np.sqrt((diff * diff).sum(axis=0))


def saliency(source: Image, cfg: PipelineConfig) -> Plane:
    """Per-pixel Euclidean norm across channels of (LoG - Wiener).

    The two filter responses diverge where a source has distinctive
    structure, so the norm is a non-negative activity map at source
    resolution.
    """
    log_out = log_filter(source, cfg.filter.log_sigma)
    wiener_out = apply_wiener(source, cfg.filter)
    return _channel_norm(log_out.data - wiener_out.data)


def weight_maps(b1: Plane, b2: Plane, cfg: PipelineConfig) -> WeightMaps:
    """Normalize two saliency maps into convex per-pixel weights.

    w1 = b1 / (b1 + b2) and w2 = b2 / (b1 + b2); where the pair sums to
    less than epsilon_tie, both weights are 0.5 so featureless pixels
    fall back to a plain average.
    """
    if b1.shape != b2.shape:
        raise ShapeMismatchError(f"saliency shapes differ: {b1.shape} vs {b2.shape}")
    total = b1 + b2
    tie = total < cfg.epsilon_tie
    safe = np.where(tie, 1.0, total)
    w1 = np.where(tie, 0.5, b1 / safe)
    w2 = np.where(tie, 0.5, b2 / safe)
    return WeightMaps(w1=w1, w2=w2)


def fuse_details(d1: Image, d2: Image, weights: WeightMaps) -> Image:
    """Weighted per-pixel sum of two detail layers.

    Weight planes broadcast across channels: every channel of a pixel
    gets the same pair of weights.
    """
    if d1.shape != d2.shape:
        raise ShapeMismatchError(f"detail shapes differ: {d1.shape} vs {d2.shape}")
    if weights.w1.shape != d1.shape[1:]:
        raise ShapeMismatchError(
            f"weight shape {weights.w1.shape} does not match plane shape {d1.shape[1:]}"
        )
    fused = weights.w1[np.newaxis] * d1.data + weights.w2[np.newaxis] * d2.data
    return Image(fused)


def fuse_bases(b1: Image, b2: Image) -> Image:
    """Plain average of the two base layers."""
    if b1.shape != b2.shape:
        raise ShapeMismatchError(f"base shapes differ: {b1.shape} vs {b2.shape}")
    return Image((b1.data + b2.data) / 2.0)


def compose(base: Image, detail: Image) -> Image:
    """Base plus detail, unclamped; the inverse of decompose."""
    return elementwise(base, detail, "add")


def _source_terms(source: Image, cfg: PipelineConfig) -> tuple[Image, Image, Plane]:
    """Base, detail and saliency for one source, sharing one Wiener pass.

    Matches decompose() and saliency() bit for bit; the Wiener output
    is just computed once instead of twice when it serves as the base.
    """
    wiener_out = apply_wiener(source, cfg.filter)
    log_out = log_filter(source, cfg.filter.log_sigma)
    if cfg.base_filter == BASE_GAUSSIAN:
        base = gaussian_blur(source, cfg.filter.log_sigma)
    else:
        base = wiener_out
    detail = elementwise(source, base, "sub")
    return base, detail, _channel_norm(log_out.data - wiener_out.data)


def summarize_full(a1: Image, a2: Image, cfg: PipelineConfig | None = None) -> SummaryResult:
    """Fuse two co-registered sources, returning all intermediates.

    Both sources must share shape; the fused image keeps that shape.
    Fusing a source pair with itself returns the source (to within
    1e-6), and swapping the sources leaves the result unchanged.
    """
    if cfg is None:
        cfg = PipelineConfig()
    if a1.shape != a2.shape:
        raise ShapeMismatchError(
            f"sources must be co-registered: {a1.shape} vs {a2.shape}"
        )
    base1, detail1, sal1 = _source_terms(a1, cfg)
    base2, detail2, sal2 = _source_terms(a2, cfg)
    weights = weight_maps(sal1, sal2, cfg)
    fused_detail = fuse_details(detail1, detail2, weights)
    fused_base = fuse_bases(base1, base2)
    return SummaryResult(
        source1=a1,
        source2=a2,
        base1=base1,
        base2=base2,
        detail1=detail1,
        detail2=detail2,
        saliency1=sal1,
        saliency2=sal2,
        weights=weights,
        fused=compose(fused_base, fused_detail),
    )


def summarize(a1: Image, a2: Image, cfg: PipelineConfig | None = None) -> Image:
    """Fused image only; see summarize_full for the intermediates."""
    return summarize_full(a1, a2, cfg).fused
