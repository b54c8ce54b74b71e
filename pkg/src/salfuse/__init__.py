"""Saliency-weighted two-scale video summarization.

A video becomes one representative image: its first frame and its
temporal average are split into base and detail layers, the details are
fused under per-pixel saliency weights, and the layers are recombined.
"""

from .bench import (
    FlowField,
    TimingReport,
    average_summary,
    edge_energy,
    flow_summary,
    horn_schunck,
    run_benchmark,
)
from .errors import (
    FormatError,
    InconsistentFramesError,
    NoFramesError,
    NoPairsError,
    ParameterError,
    SalfuseError,
    ShapeMismatchError,
)
from .filters import (
    ADAPTIVE,
    FREQUENCY,
    FilterConfig,
    Kernel1D,
    apply_wiener,
    convolve_naive,
    convolve_separable,
    gaussian_blur,
    gaussian_kernel,
    laplacian5,
    log_filter,
    wiener_adaptive,
    wiener_frequency,
)
from .image import Image, Plane, elementwise, image_from_bytes, image_to_bytes, quantize
from .ingest import (
    FrameStream,
    build_sources,
    first_frame,
    load_image,
    open_stream,
    save_image,
    temporal_average,
)
from .pipeline import (
    Decomposition,
    PipelineConfig,
    SummaryResult,
    WeightMaps,
    compose,
    decompose,
    fuse_bases,
    fuse_details,
    saliency,
    summarize,
    summarize_full,
    weight_maps,
)

__version__ = "0.1.0"

__all__ = [
    "Image",
    "Plane",
    "image_from_bytes",
    "image_to_bytes",
    "elementwise",
    "quantize",
    "Kernel1D",
    "FilterConfig",
    "ADAPTIVE",
    "FREQUENCY",
    "gaussian_kernel",
    "gaussian_blur",
    "convolve_separable",
    "convolve_naive",
    "laplacian5",
    "log_filter",
    "wiener_adaptive",
    "wiener_frequency",
    "apply_wiener",
    "PipelineConfig",
    "Decomposition",
    "WeightMaps",
    "SummaryResult",
    "decompose",
    "saliency",
    "weight_maps",
    "fuse_details",
    "fuse_bases",
    "compose",
    "summarize",
    "summarize_full",
    "FrameStream",
    "open_stream",
    "first_frame",
    "temporal_average",
    "build_sources",
    "load_image",
    "save_image",
    "FlowField",
    "TimingReport",
    "horn_schunck",
    "average_summary",
    "flow_summary",
    "run_benchmark",
    "edge_energy",
    "SalfuseError",
    "ParameterError",
    "ShapeMismatchError",
    "FormatError",
    "NoFramesError",
    "InconsistentFramesError",
    "NoPairsError",
]
