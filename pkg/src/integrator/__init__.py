from .config import Crop, RenderConfig, Strategy
from .estimator import (
    MAX_SPECULAR_DEPTH,
    PrimaryBatch,
    estimate_direct,
    estimate_direct_batch,
    trace_primary,
    trace_primary_batch,
)
from .images import (
    STATS_COLUMNS,
    read_pfm,
    rows_csv,
    stats_csv,
    tonemap,
    write_csv,
    write_pfm,
    write_ppm,
    write_stats_csv,
)
from .metrics import ImageMetrics, compute_metrics
from .reference import REFERENCE_SPP, load_or_render_reference
from .render import Renderer, RenderOutput, WaveStats, make_tiles, render
from .selection import (
    NeuralSelector,
    PowerSelector,
    Selection,
    TreeSelector,
    UniformSelector,
)

__all__ = [
    "Crop",
    "RenderConfig",
    "Strategy",
    "MAX_SPECULAR_DEPTH",
    "PrimaryBatch",
    "estimate_direct",
    "estimate_direct_batch",
    "trace_primary",
    "trace_primary_batch",
    "STATS_COLUMNS",
    "read_pfm",
    "rows_csv",
    "stats_csv",
    "tonemap",
    "write_csv",
    "write_pfm",
    "write_ppm",
    "write_stats_csv",
    "ImageMetrics",
    "compute_metrics",
    "REFERENCE_SPP",
    "load_or_render_reference",
    "Renderer",
    "RenderOutput",
    "WaveStats",
    "make_tiles",
    "render",
    "NeuralSelector",
    "PowerSelector",
    "Selection",
    "TreeSelector",
    "UniformSelector",
]
