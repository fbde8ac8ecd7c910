"""The residual cluster-selection MLP: parameters, forward pass and backprop.

A ``NetworkState`` owns every learnable array (dense layers plus the position
grid) and the Adam moments for each of them. Rendering threads never see a
``NetworkState`` that is being trained; they read a `snapshot`.
"""

from dataclasses import dataclass, field

import numpy as np

from encoding.features import InputMode, encode_features, feature_length
from encoding.grid import GRID_FEATURES, GRID_RESOLUTION, GridEncoding, GridFootprint, grid_backprop
from scene.query import ShadingBatch

HIDDEN_LAYERS = (64, 64, 64)
GRID_PARAM = "grid"


def _weight(i: int) -> str:
    return f"W{i}"


def _bias(i: int) -> str:
    return f"b{i}"


@dataclass
class NetworkState:
    """
    Learnable parameters θ and their optimiser state.

    ``params`` holds ``W0..W{L-1}`` with shape (fan_in, fan_out), ``b0..b{L-1}`` and
    ``grid`` (the table of `grid_encoding`, the very same array). ``m`` and ``v``
    are the Adam first and second moments keyed like ``params``; ``step`` counts
    applied updates.
    """

    params: dict[str, np.ndarray]
    grid_encoding: GridEncoding
    input_mode: InputMode = InputMode.CONTINUOUS
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0

    @property
    def layer_count(self) -> int:
        return sum(1 for name in self.params if name.startswith("W"))

    @property
    def layer_shapes(self) -> list[tuple[int, int]]:
        return [self.params[_weight(i)].shape for i in range(self.layer_count)]

    @property
    def feature_length(self) -> int:
        return self.params[_weight(0)].shape[0]

    @property
    def cluster_count(self) -> int:
        return self.params[_weight(self.layer_count - 1)].shape[1]

    @property
    def dtype(self) -> np.dtype:
        return self.params[_weight(0)].dtype

    def snapshot(self) -> "NetworkState":
        """Read-only deep copy of the parameters, without optimiser state."""
        params = {}
        for name, value in self.params.items():
            copy = value.copy()
            copy.flags.writeable = False
            params[name] = copy
        return NetworkState(
            params=params,
            grid_encoding=self.grid_encoding.with_table(params[GRID_PARAM]),
            input_mode=self.input_mode,
            step=self.step,
        )

    def all_finite(self) -> bool:
        return all(bool(np.isfinite(p).all()) for p in self.params.values())


def init_network(
    cluster_count: int,
    bounds_min: np.ndarray,
    bounds_max: np.ndarray,
    seed: int = 0,
    hidden: tuple[int, ...] = HIDDEN_LAYERS,
    grid_resolution: int = GRID_RESOLUTION,
    grid_features: int = GRID_FEATURES,
    input_mode: InputMode = InputMode.CONTINUOUS,
    dtype: np.dtype = np.float32,
) -> NetworkState:
    """
    Build a freshly initialised network over the given scene bounds.

    Hidden layers are He-initialised with zero biases; the output layer and the
    grid table start at exactly zero, so the first logits are all zero.

    Arguments:
        cluster_count (int): S, the output width.
        bounds_min (np.ndarray): Scene AABB minimum, for the position grid.
        bounds_max (np.ndarray): Scene AABB maximum.
        seed (int, optional): Seed for the hidden-layer initialisation.
        hidden (tuple[int, ...], optional): Hidden widths. Defaults to three layers of 64.
        grid_resolution (int, optional): Vertices per axis of the grid.
        grid_features (int, optional): Features per grid vertex.
        input_mode (InputMode, optional): Continuous or quantised inputs.
        dtype (np.dtype, optional): Parameter precision. ``float64`` for gradient checks.

    Returns:
        NetworkState: Parameters with zeroed Adam moments.
    """
    if cluster_count < 1:
        raise ValueError(f"cluster_count must be >= 1, got {cluster_count}")
    rng = np.random.default_rng(seed)
    grid = GridEncoding.for_bounds(bounds_min, bounds_max, grid_resolution, grid_features, dtype)
    widths = [feature_length(grid_features), *hidden, cluster_count]
    params: dict[str, np.ndarray] = {}
    last = len(widths) - 2
    for i, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:], strict=True)):
        if i == last:
            params[_weight(i)] = np.zeros((fan_in, fan_out), dtype=dtype)
        else:
            params[_weight(i)] = (rng.standard_normal((fan_in, fan_out)) * np.sqrt(2.0 / fan_in)).astype(dtype)
        params[_bias(i)] = np.zeros(fan_out, dtype=dtype)
    params[GRID_PARAM] = grid.table
    state = NetworkState(params=params, grid_encoding=grid, input_mode=InputMode(input_mode))
    state.m = {name: np.zeros_like(p) for name, p in params.items()}
    state.v = {name: np.zeros_like(p) for name, p in params.items()}
    return state


@dataclass(frozen=True)
class ForwardCache:
    features: np.ndarray
    footprint: GridFootprint | None
    activations: list[np.ndarray]  # input of each layer, float64
    logits: np.ndarray


def forward_cached(
    state: NetworkState, features: np.ndarray, footprint: GridFootprint | None = None
) -> ForwardCache:
    h = np.asarray(features, dtype=state.dtype)
    activations = []
    last = state.layer_count - 1
    for i in range(state.layer_count):
        activations.append(h.astype(np.float64, copy=False))
        z = h @ state.params[_weight(i)] + state.params[_bias(i)]
        h = z if i == last else np.maximum(z, 0.0)
    return ForwardCache(
        features=features,
        footprint=footprint,
        activations=activations,
        logits=h.astype(np.float64),
    )


def forward(state: NetworkState, features: np.ndarray) -> np.ndarray:
    """
    Residual logits f_θ for a batch of feature vectors.

    Arguments:
        state (NetworkState): Parameters (or a snapshot).
        features (np.ndarray): (N, feature_length) encoder output.

    Returns:
        np.ndarray: (N, S) float64 logits.

    Raises:
        ValueError: Feature length does not match the network.
    """
    features = np.atleast_2d(features)
    if features.shape[1] != state.feature_length:
        raise ValueError(
            f"feature length {features.shape[1]} does not match network input {state.feature_length}"
        )
    return forward_cached(state, features).logits


def encode_queries(state: NetworkState, queries: ShadingBatch) -> tuple[np.ndarray, GridFootprint]:
    return encode_features(state.grid_encoding, queries, state.input_mode)


def predict_logits(state: NetworkState, queries: ShadingBatch) -> np.ndarray:
    """Encode the queries with the state's grid and run the MLP, (N, S)."""
    features, _ = encode_queries(state, queries)
    return forward(state, features)


def backward(state: NetworkState, cache: ForwardCache, dlogits: np.ndarray) -> dict[str, np.ndarray]:
    """
    Gradients of a scalar loss with respect to every parameter, given dL/dlogits.

    Returns float64 arrays keyed like ``state.params``. The grid gradient is zero
    when the cache has no footprint.
    """
    grads: dict[str, np.ndarray] = {}
    delta = np.asarray(dlogits, dtype=np.float64)
    for i in reversed(range(state.layer_count)):
        a = cache.activations[i]
        grads[_weight(i)] = a.T @ delta
        grads[_bias(i)] = delta.sum(axis=0)
        delta = delta @ state.params[_weight(i)].astype(np.float64).T
        if i > 0:
            delta = delta * (a > 0.0)
    if cache.footprint is not None:
        grid = state.grid_encoding
        grads[GRID_PARAM] = grid_backprop(grid, cache.footprint, delta[:, : grid.features])
    else:
        grads[GRID_PARAM] = np.zeros(state.params[GRID_PARAM].shape)
    return grads
