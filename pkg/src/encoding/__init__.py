from .directional import (
    ONE_BLOB_BINS,
    SH_COEFFICIENTS,
    encode_direction,
    encode_normal,
    one_blob,
)
from .features import (
    InputMode,
    encode_features,
    feature_length,
    snap_directions,
    snap_positions,
)
from .grid import (
    GRID_FEATURES,
    GRID_RESOLUTION,
    GridEncoding,
    GridFootprint,
    encode_position,
    grid_backprop,
    grid_footprint,
)

__all__ = [
    "ONE_BLOB_BINS",
    "SH_COEFFICIENTS",
    "encode_direction",
    "encode_normal",
    "one_blob",
    "InputMode",
    "encode_features",
    "feature_length",
    "snap_directions",
    "snap_positions",
    "GRID_FEATURES",
    "GRID_RESOLUTION",
    "GridEncoding",
    "GridFootprint",
    "encode_position",
    "grid_backprop",
    "grid_footprint",
]
