"""Timing baselines: plain averaging and dense optical flow.

The point of the benchmark is the cost ratio: the fusion pipeline is a
handful of filter passes per video, while a classical optical-flow
summary pays dozens of Jacobi iterations on every consecutive frame
pair.  All methods run single-threaded by default; the flow method can
fan pairs out over a thread pool when explicitly asked to.
"""

from __future__ import annotations

import json
import logging
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import NoFramesError, NoPairsError, ParameterError, ShapeMismatchError
from .filters import laplacian5
from .image import Image, Plane
from .ingest import Accumulator, FrameStream, temporal_average
from .pipeline import PipelineConfig, summarize

logger = logging.getLogger(__name__)

METHODS = ("saliency_fusion", "average", "optical_flow")

# Flow derivatives feed denominators of alpha^2 + |grad|^2 with alpha
# around 1, the classical operating point for 8-bit intensities, so
# luma is lifted from [0, 1] to [0, 255] before differencing.
FLOW_SCALE = 255.0

_clock = time.perf_counter


class FlowField(NamedTuple):
    """Dense displacement field: u is columns/frame, v is rows/frame."""

    u: Plane
    v: Plane


@dataclass(frozen=True)
class TimingReport:
    """One benchmarked method: geometry, best wall time, and context."""

    method: str
    frames: int
    width: int
    height: int
    wall_seconds: float
    per_frame_ms: float
    threads: int
    repeats: int
    machine: str

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "method": self.method,
                "frames": self.frames,
                "width": self.width,
                "height": self.height,
                "wall_seconds": self.wall_seconds,
                "per_frame_ms": self.per_frame_ms,
                "threads": self.threads,
                "repeats": self.repeats,
                "machine": self.machine,
            }
        )


def luma(image: Image) -> Plane:
    """BT.601 luma in the image's own [0, 1] scale."""
    if image.channels == 1:
        return image.data[0]
    r, g, b = image.data
    return 0.299 * r + 0.587 * g + 0.114 * b


def _four_neighbor_mean(plane: Plane) -> Plane:
    padded = np.pad(plane, 1, mode="edge")
    return 0.25 * (
        padded[:-2, 1:-1] + padded[2:, 1:-1] + padded[1:-1, :-2] + padded[1:-1, 2:]
    )


def _flow_derivatives(f1: Plane, f2: Plane) -> tuple[Plane, Plane, Plane]:
    """Forward 2x2 derivative stencils averaged over both frames.

    The bottom row and right column are replicated so the estimates keep
    frame size.
    """
    a = np.pad(f1, ((0, 1), (0, 1)), mode="edge")
    b = np.pad(f2, ((0, 1), (0, 1)), mode="edge")
    ix = 0.25 * (
        (a[:-1, 1:] - a[:-1, :-1])
        + (a[1:, 1:] - a[1:, :-1])
        + (b[:-1, 1:] - b[:-1, :-1])
        + (b[1:, 1:] - b[1:, :-1])
    )
    iy = 0.25 * (
        (a[1:, :-1] - a[:-1, :-1])
        + (a[1:, 1:] - a[:-1, 1:])
        + (b[1:, :-1] - b[:-1, :-1])
        + (b[1:, 1:] - b[:-1, 1:])
    )
    it = 0.25 * (
        (b[:-1, :-1] - a[:-1, :-1])
        + (b[:-1, 1:] - a[:-1, 1:])
        + (b[1:, :-1] - a[1:, :-1])
        + (b[1:, 1:] - a[1:, 1:])
    )
    return ix, iy, it


def horn_schunck(
    f1: Plane, f2: Plane, alpha: float = 1.0, iters: int = 100
) -> FlowField:
    """Global-smoothness optical flow between two intensity planes.

    Fixed-count Jacobi iteration from a zero flow field:
    u <- ubar - Ix * (Ix*ubar + Iy*vbar + It) / (alpha^2 + Ix^2 + Iy^2),
    likewise for v, where ubar/vbar are 4-neighbor means with edge
    replication.  Identical frames give It = 0 and therefore an exactly
    zero field.  alpha is calibrated for 8-bit-scale intensities.
    """
    if alpha <= 0.0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    if iters < 1:
        raise ParameterError(f"iters must be >= 1, got {iters}")
    f1 = np.asarray(f1, dtype=np.float64)
    f2 = np.asarray(f2, dtype=np.float64)
    if f1.ndim != 2 or f1.shape != f2.shape:
        raise ShapeMismatchError(f"frame shapes differ: {f1.shape} vs {f2.shape}")
    ix, iy, it = _flow_derivatives(f1, f2)
    denom = alpha * alpha + ix * ix + iy * iy
    u = np.zeros_like(f1)
    v = np.zeros_like(f1)
    for _ in range(iters):
        ubar = _four_neighbor_mean(u)
        vbar = _four_neighbor_mean(v)
        frac = (ix * ubar + iy * vbar + it) / denom
        u = ubar - ix * frac
        v = vbar - iy * frac
    return FlowField(u=u, v=v)


def average_summary(stream: FrameStream) -> Image:
    """Plain temporal-average baseline; identical to ingest.temporal_average."""
    return temporal_average(stream)


def flow_summary(stream: FrameStream, alpha: float = 1.0, iters: int = 100) -> Image:
    """Optical-flow-cost baseline summary.

    Runs horn_schunck on every consecutive luma pair (keeping only a
    magnitude checksum, logged at debug level) and returns the plain
    temporal average, so its output matches average_summary while its
    cost reflects dense flow.
    """
    acc = Accumulator()
    prev: Plane | None = None
    pairs = 0
    checksum = 0.0
    for frame in stream.frames():
        acc.add(frame)
        cur = luma(frame) * FLOW_SCALE
        if prev is not None:
            flow = horn_schunck(prev, cur, alpha=alpha, iters=iters)
            checksum += float(np.abs(flow.u).sum() + np.abs(flow.v).sum())
            pairs += 1
        prev = cur
    if pairs == 0:
        raise NoPairsError("optical-flow summary needs at least two frames")
    logger.debug("flow checksum over %d pairs: %.6g", pairs, checksum)
    return acc.mean()


def edge_energy(image: Image) -> float:
    """Sum of absolute 5-point Laplacian responses over all channels.

    A blur-sensitive sharpness score: averaging away structure lowers
    it, re-injected detail raises it.
    """
    return float(
        sum(np.abs(laplacian5(image.data[c])).sum() for c in range(image.channels))
    )


def _mean_of(frames: Iterable[Image]) -> Image:
    acc = Accumulator()
    for frame in frames:
        acc.add(frame)
    return acc.mean()


def _flow_over(
    lumas: Sequence[Plane], alpha: float, iters: int, threads: int
) -> float:
    if len(lumas) < 2:
        raise NoPairsError("optical flow needs at least two frames")
    pairs = list(zip(lumas[:-1], lumas[1:]))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            flows = list(
                pool.map(lambda pq: horn_schunck(pq[0], pq[1], alpha, iters), pairs)
            )
    else:
        flows = [horn_schunck(p, q, alpha, iters) for p, q in pairs]
    return float(sum(float(np.abs(f.u).sum() + np.abs(f.v).sum()) for f in flows))


def run_benchmark(
    stream: FrameStream,
    methods: Sequence[str] = METHODS,
    repeats: int = 3,
    *,
    pipeline_cfg: PipelineConfig | None = None,
    flow_alpha: float = 1.0,
    flow_iters: int = 100,
    threads: int = 1,
) -> list[TimingReport]:
    """Time each method end to end on preloaded frames; best of repeats.

    Frames are decoded once up front so the clock covers compute, not
    file IO.  Every method gets one untimed warm-up run, then `repeats`
    timed runs; wall_seconds is the minimum.  threads applies to the
    optical_flow method only; everything else reports 1.
    """
    if repeats < 1:
        raise ParameterError(f"repeats must be >= 1, got {repeats}")
    if threads < 1:
        raise ParameterError(f"threads must be >= 1, got {threads}")
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise ParameterError(f"unknown methods {unknown}; choose from {list(METHODS)}")
    frames = list(stream.frames())
    if not frames:
        raise NoFramesError(f"no frames in {stream.path}")
    cfg = pipeline_cfg if pipeline_cfg is not None else PipelineConfig()
    machine = _machine_descriptor()

    def run_average() -> None:
        _mean_of(frames)

    def run_fusion() -> None:
        summarize(frames[0], _mean_of(frames), cfg)

    def run_flow() -> None:
        lumas = [luma(f) * FLOW_SCALE for f in frames]
        _flow_over(lumas, flow_alpha, flow_iters, threads)
        _mean_of(frames)

    runners = {
        "average": run_average,
        "saliency_fusion": run_fusion,
        "optical_flow": run_flow,
    }
    reports = []
    for method in methods:
        runner = runners[method]
        runner()  # warm-up, untimed
        best = None
        for _ in range(repeats):
            start = _clock()
            runner()
            elapsed = _clock() - start
            best = elapsed if best is None else min(best, elapsed)
        reports.append(
            TimingReport(
                method=method,
                frames=len(frames),
                width=frames[0].width,
                height=frames[0].height,
                wall_seconds=best,
                per_frame_ms=1000.0 * best / len(frames),
                threads=threads if method == "optical_flow" else 1,
                repeats=repeats,
                machine=machine,
            )
        )
    return reports


def _machine_descriptor() -> str:
    return (
        f"{platform.platform()}; {platform.machine()};"
        f" Python {platform.python_version()}; numpy {np.__version__}"
    )
