"""Learnable dense feature grid over the scene bounds, trilinearly interpolated."""

from dataclasses import dataclass, replace

import numpy as np

GRID_RESOLUTION = 32
GRID_FEATURES = 8
BOUNDS_PADDING = 0.01

# corner offsets in (x, y, z) bit order: corner k has offset ((k >> 0) & 1, (k >> 1) & 1, (k >> 2) & 1)
_CORNERS = np.array([[(k >> 0) & 1, (k >> 1) & 1, (k >> 2) & 1] for k in range(8)], dtype=np.int64)


@dataclass(frozen=True)
class GridFootprint:
    """The 8 vertex rows and trilinear weights touched by each encoded position."""

    ids: np.ndarray  # (N, 8) rows into the table
    weights: np.ndarray  # (N, 8), sum to 1 per row


@dataclass(frozen=True)
class GridEncoding:
    """R³ vertices with ``features`` learnable values each, spanning padded scene bounds.

    The table is row-major with x fastest: vertex (i, j, k) is row ``i + R·j + R²·k``.
    """

    resolution: int
    features: int
    bounds_min: np.ndarray
    bounds_max: np.ndarray
    table: np.ndarray  # (R³, features)

    @classmethod
    def for_bounds(
        cls,
        bounds_min: np.ndarray,
        bounds_max: np.ndarray,
        resolution: int = GRID_RESOLUTION,
        features: int = GRID_FEATURES,
        dtype: np.dtype = np.float32,
    ) -> "GridEncoding":
        """Zero-initialised grid over ``[bounds_min, bounds_max]`` padded by 1% of the extent."""
        if resolution < 2:
            raise ValueError(f"grid resolution must be >= 2, got {resolution}")
        lo = np.asarray(bounds_min, dtype=np.float64)
        hi = np.asarray(bounds_max, dtype=np.float64)
        extent = np.maximum(hi - lo, 1e-6)
        return cls(
            resolution=resolution,
            features=features,
            bounds_min=lo - BOUNDS_PADDING * extent,
            bounds_max=hi + BOUNDS_PADDING * extent,
            table=np.zeros((resolution**3, features), dtype=dtype),
        )

    def with_table(self, table: np.ndarray) -> "GridEncoding":
        return replace(self, table=table)

    def normalize(self, positions: np.ndarray) -> np.ndarray:
        """Positions mapped into the unit cube and clamped to [0, 1]³."""
        t = (np.asarray(positions, dtype=np.float64) - self.bounds_min) / (self.bounds_max - self.bounds_min)
        return np.clip(t, 0.0, 1.0)


def grid_footprint(grid: GridEncoding, positions: np.ndarray) -> GridFootprint:
    r = grid.resolution
    g = grid.normalize(positions).reshape(-1, 3) * (r - 1)
    base = np.minimum(np.floor(g).astype(np.int64), r - 2)
    frac = g - base
    corner = base[:, None, :] + _CORNERS[None, :, :]  # (N, 8, 3)
    ids = corner[..., 0] + r * corner[..., 1] + r * r * corner[..., 2]
    w = np.where(_CORNERS[None, :, :] == 1, frac[:, None, :], 1.0 - frac[:, None, :])
    return GridFootprint(ids=ids, weights=w.prod(axis=-1))


def encode_position(grid: GridEncoding, positions: np.ndarray) -> tuple[np.ndarray, GridFootprint]:
    """
    Trilinearly interpolated grid features for each position.

    Arguments:
        grid (GridEncoding): Grid layout and table.
        positions (np.ndarray): (N, 3) or (3,) finite world-space points.

    Returns:
        tuple[np.ndarray, GridFootprint]: (N, features) values and the footprint
        needed by `grid_backprop`.
    """
    footprint = grid_footprint(grid, positions)
    values = np.einsum("nk,nkf->nf", footprint.weights, grid.table[footprint.ids])
    return values, footprint


def grid_backprop(grid: GridEncoding, footprint: GridFootprint, upstream: np.ndarray) -> np.ndarray:
    """
    Scatter ``upstream`` (N, features) gradients back onto the table.

    Returns:
        np.ndarray: Dense (R³, features) gradient, accumulated additively over the batch.
    """
    grad = np.zeros(grid.table.shape, dtype=np.float64)
    contributions = footprint.weights[:, :, None] * np.asarray(upstream, dtype=np.float64)[:, None, :]
    np.add.at(grad, footprint.ids.reshape(-1), contributions.reshape(-1, grid.features))
    return grad
