"""Assembly of the network input: grid ⊕ spherical harmonics ⊕ one-blob."""

from enum import StrEnum

import numpy as np

from encoding.directional import ONE_BLOB_BINS, SH_COEFFICIENTS, encode_direction, encode_normal
from encoding.grid import GridEncoding, GridFootprint, encode_position
from scene.geometry import normalize
from scene.query import ShadingBatch

DISCRETE_POSITION_CELLS = 32
DISCRETE_DIRECTION_BUCKETS = 8


class InputMode(StrEnum):
    CONTINUOUS = "continuous"
    DISCRETE = "discrete"


def feature_length(grid_features: int) -> int:
    return grid_features + SH_COEFFICIENTS + 3 * ONE_BLOB_BINS


def snap_positions(grid: GridEncoding, positions: np.ndarray) -> np.ndarray:
    """Move each position to the centre of its cell in a 32³ partition of the grid bounds."""
    cells = DISCRETE_POSITION_CELLS
    t = grid.normalize(positions)
    index = np.minimum(np.floor(t * cells), cells - 1)
    centre = (index + 0.5) / cells
    return grid.bounds_min + centre * (grid.bounds_max - grid.bounds_min)


def snap_directions(directions: np.ndarray) -> np.ndarray:
    """Bucket each component of a unit vector into 8 bins, then renormalise."""
    buckets = DISCRETE_DIRECTION_BUCKETS
    t = 0.5 * (np.asarray(directions, dtype=np.float64) + 1.0)
    index = np.minimum(np.floor(t * buckets), buckets - 1)
    return normalize(2.0 * (index + 0.5) / buckets - 1.0)


def encode_features(
    grid: GridEncoding, queries: ShadingBatch, mode: InputMode = InputMode.CONTINUOUS
) -> tuple[np.ndarray, GridFootprint]:
    """
    Feature vectors for a batch of shading queries.

    Layout is fixed: grid features first, then the 16 SH coefficients of the
    outgoing direction, then the 96 one-blob activations of the normal. In
    ``discrete`` mode position and direction are quantised before encoding; the
    normal is always continuous.

    Returns:
        tuple[np.ndarray, GridFootprint]: (N, feature_length) float64 features and
        the grid footprint for backprop.
    """
    positions = queries.positions
    directions = queries.out_dirs
    if InputMode(mode) == InputMode.DISCRETE:
        positions = snap_positions(grid, positions)
        directions = snap_directions(directions)
    grid_values, footprint = encode_position(grid, positions)
    features = np.concatenate(
        [grid_values, encode_direction(directions), encode_normal(queries.normals)], axis=1
    )
    return features, footprint
