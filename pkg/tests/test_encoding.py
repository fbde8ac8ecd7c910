import math

import numpy as np
import pytest
from scipy.special import lpmv

from conftest import floor_query_batch
from encoding.directional import ONE_BLOB_BINS, encode_direction, encode_normal, one_blob
from encoding.features import InputMode, encode_features, feature_length, snap_directions, snap_positions
from encoding.grid import GridEncoding, encode_position, grid_backprop, grid_footprint


def _grid(resolution: int = 5, features: int = 3, seed: int = 0) -> GridEncoding:
    grid = GridEncoding.for_bounds(np.zeros(3), np.array([2.0, 1.0, 4.0]), resolution, features, np.float64)
    table = np.random.default_rng(seed).normal(size=grid.table.shape)
    return grid.with_table(table)


def _vertex_position(grid: GridEncoding, i: int, j: int, k: int) -> np.ndarray:
    t = np.array([i, j, k]) / (grid.resolution - 1)
    return grid.bounds_min + t * (grid.bounds_max - grid.bounds_min)


def _unit_vectors(n: int, seed: int) -> np.ndarray:
    v = np.random.default_rng(seed).normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def test_bounds_are_padded():
    grid = GridEncoding.for_bounds(np.zeros(3), np.array([2.0, 1.0, 4.0]))

    np.testing.assert_allclose(grid.bounds_min, [-0.02, -0.01, -0.04])
    np.testing.assert_allclose(grid.bounds_max, [2.02, 1.01, 4.04])
    assert grid.table.shape == (32**3, 8)
    assert not grid.table.any()


def test_vertices_return_their_table_row():
    grid = _grid()
    r = grid.resolution
    for i, j, k in [(0, 0, 0), (1, 2, 3), (4, 4, 4), (3, 0, 2)]:
        values, _ = encode_position(grid, _vertex_position(grid, i, j, k))
        np.testing.assert_allclose(values[0], grid.table[i + r * j + r * r * k], atol=1e-12)


def test_interpolation_reproduces_linear_fields():
    grid = _grid(resolution=6, features=2)
    r = grid.resolution
    i, j, k = np.meshgrid(np.arange(r), np.arange(r), np.arange(r), indexing="ij")
    rows = (i + r * j + r * r * k).reshape(-1)
    coords = np.stack([i, j, k], axis=-1).reshape(-1, 3).astype(np.float64)
    table = np.zeros((r**3, 2))
    table[rows, 0] = coords @ [1.0, -2.0, 0.5]
    table[rows, 1] = 3.0
    grid = grid.with_table(table)
    positions = np.random.default_rng(1).uniform(grid.bounds_min, grid.bounds_max, size=(50, 3))

    values, footprint = encode_position(grid, positions)

    g = grid.normalize(positions) * (r - 1)
    np.testing.assert_allclose(values[:, 0], g @ [1.0, -2.0, 0.5], atol=1e-10)
    np.testing.assert_allclose(values[:, 1], 3.0)
    np.testing.assert_allclose(footprint.weights.sum(axis=1), 1.0)


def test_positions_outside_the_bounds_are_clamped():
    grid = _grid()

    outside, _ = encode_position(grid, np.array([[-5.0, 0.5, 100.0]]))
    edge, _ = encode_position(grid, np.array([[grid.bounds_min[0], 0.5, grid.bounds_max[2]]]))

    np.testing.assert_allclose(outside, edge)


def test_grid_backprop_is_the_adjoint_of_interpolation():
    grid = _grid(resolution=4, features=3)
    rng = np.random.default_rng(2)
    positions = rng.uniform(grid.bounds_min, grid.bounds_max, size=(30, 3))
    upstream = rng.normal(size=(30, 3))
    footprint = grid_footprint(grid, positions)

    grad = grid_backprop(grid, footprint, upstream)

    # values are linear in the table, so <upstream, values(T)> == <grad, T> for any T
    perturbed = grid.with_table(rng.normal(size=grid.table.shape))
    values, _ = encode_position(perturbed, positions)
    assert np.sum(upstream * values) == pytest.approx(np.sum(grad * perturbed.table))


def _real_sh(band: int, m: int, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    k = math.sqrt((2 * band + 1) / (4.0 * math.pi) * math.factorial(band - abs(m)) / math.factorial(band + abs(m)))
    p = lpmv(abs(m), band, np.cos(theta))  # includes the Condon-Shortley phase
    if m > 0:
        return math.sqrt(2.0) * k * np.cos(m * phi) * p
    if m < 0:
        return math.sqrt(2.0) * k * np.sin(-m * phi) * p
    return k * p


def test_spherical_harmonics_match_associated_legendre():
    d = _unit_vectors(100, seed=3)
    theta = np.arccos(d[:, 2])
    phi = np.arctan2(d[:, 1], d[:, 0])

    sh = encode_direction(d)

    for band in range(4):
        for m in range(-band, band + 1):
            np.testing.assert_allclose(sh[:, band * band + band + m], _real_sh(band, m, theta, phi), atol=1e-9)


def test_spherical_harmonics_are_orthonormal():
    d = _unit_vectors(200000, seed=4)

    sh = encode_direction(d)

    gram = 4.0 * np.pi * sh.T @ sh / len(d)
    np.testing.assert_allclose(gram, np.eye(16), atol=0.03)


def test_one_blob_peaks_at_the_bin_centre():
    blob = one_blob(np.array([(5 + 0.5) / ONE_BLOB_BINS]))[0]

    assert blob.argmax() == 5
    assert blob[5] == pytest.approx(1.0)
    assert blob[4] == pytest.approx(blob[6])
    assert blob[4] == pytest.approx(math.exp(-0.5))


def test_normal_encoding_layout():
    encoded = encode_normal(np.array([[-1.0, 0.0, 1.0]]))[0]

    assert encoded.shape == (96,)
    assert encoded[:32].argmax() == 0
    assert encoded[32:64].argmax() in (15, 16)
    assert encoded[64:].argmax() == 31


def test_feature_layout():
    grid = _grid(features=8)
    queries = floor_query_batch(4)

    features, _ = encode_features(grid, queries)

    assert feature_length(8) == 120
    assert features.shape == (4, 120)
    np.testing.assert_allclose(features[:, 8:24], encode_direction(queries.out_dirs))
    np.testing.assert_allclose(features[:, 24:], encode_normal(queries.normals))


def test_discrete_inputs_are_quantised():
    grid = _grid(features=8)
    a = floor_query_batch(1, position=(0.300, 0.300, 0.300))
    b = floor_query_batch(1, position=(0.305, 0.305, 0.305))

    fa, _ = encode_features(grid, a, InputMode.DISCRETE)
    fb, _ = encode_features(grid, b, InputMode.DISCRETE)
    ca, _ = encode_features(grid, a, InputMode.CONTINUOUS)
    cb, _ = encode_features(grid, b, InputMode.CONTINUOUS)

    np.testing.assert_array_equal(fa, fb)
    assert not np.array_equal(ca, cb)


def test_snapping_stays_in_bounds_and_unit_length():
    grid = _grid()
    rng = np.random.default_rng(5)
    positions = rng.uniform(-1.0, 5.0, size=(100, 3))

    snapped = snap_positions(grid, positions)
    directions = snap_directions(_unit_vectors(100, seed=6))

    assert np.all(snapped >= grid.bounds_min) and np.all(snapped <= grid.bounds_max)
    np.testing.assert_allclose(snap_positions(grid, snapped), snapped)
    np.testing.assert_allclose(np.linalg.norm(directions, axis=1), 1.0)
