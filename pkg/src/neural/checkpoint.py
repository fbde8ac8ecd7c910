"""Versioned little-endian binary checkpoints of a `NetworkState`.

Layout::

    header   <8s I I I I I Q   magic, version, S, feature length, dtype code,
                               input mode code, Adam step
    grid     <I I 6d           resolution, features per vertex, bounds min/max
    layers   <I then <I I      layer count, then (fan_in, fan_out) per layer
    arrays                     for W0, b0, ..., W{L-1}, b{L-1}, grid in order:
                               parameter, first moment, second moment, raw
"""

import struct
from pathlib import Path

import numpy as np

from encoding.features import InputMode
from encoding.grid import GridEncoding
from neural.network import GRID_PARAM, NetworkState
from utils.errors import CheckpointError, CheckpointTruncatedError, CheckpointVersionError
from utils.files import atomic_write_bytes
from utils.logging import get_logger

logger = get_logger(__name__)

CHECKPOINT_MAGIC = b"LUMISEL\x00"
CHECKPOINT_VERSION = 1

_HEADER = struct.Struct("<8sIIIIIQ")
_GRID = struct.Struct("<II6d")
_COUNT = struct.Struct("<I")
_LAYER = struct.Struct("<II")

_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
_DTYPE_CODES = {np.dtype(np.float32): 0, np.dtype(np.float64): 1}
_MODES = {0: InputMode.CONTINUOUS, 1: InputMode.DISCRETE}
_MODE_CODES = {mode: code for code, mode in _MODES.items()}


def _param_order(layer_count: int) -> list[str]:
    names = []
    for i in range(layer_count):
        names += [f"W{i}", f"b{i}"]
    return [*names, GRID_PARAM]


def checkpoint_bytes(state: NetworkState) -> bytes:
    grid = state.grid_encoding
    dtype_code = _DTYPE_CODES[np.dtype(state.dtype)]
    parts = [
        _HEADER.pack(
            CHECKPOINT_MAGIC,
            CHECKPOINT_VERSION,
            state.cluster_count,
            state.feature_length,
            dtype_code,
            _MODE_CODES[state.input_mode],
            state.step,
        ),
        _GRID.pack(grid.resolution, grid.features, *grid.bounds_min, *grid.bounds_max),
        _COUNT.pack(state.layer_count),
    ]
    parts += [_LAYER.pack(*shape) for shape in state.layer_shapes]
    little = _DTYPES[dtype_code]
    for name in _param_order(state.layer_count):
        for source in (state.params, state.m, state.v):
            array = source.get(name)
            if array is None:
                array = np.zeros_like(state.params[name])
            parts.append(np.ascontiguousarray(array, dtype=little).tobytes())
    return b"".join(parts)


def checkpoint_save(state: NetworkState, path: str | Path) -> Path:
    """Write ``state`` (parameters and Adam moments) atomically to ``path``."""
    path = atomic_write_bytes(path, checkpoint_bytes(state))
    logger.info("Saved checkpoint '%s' (S = %d, step %d).", path, state.cluster_count, state.step)
    return path


class _Reader:
    def __init__(self, payload: bytes):
        self.payload = payload
        self.offset = 0

    def take(self, size: int, what: str) -> bytes:
        end = self.offset + size
        if end > len(self.payload):
            raise CheckpointTruncatedError(
                f"checkpoint truncated while reading {what}",
                expected=end,
                actual=len(self.payload),
            )
        chunk = self.payload[self.offset : end]
        self.offset = end
        return chunk

    def unpack(self, layout: struct.Struct, what: str) -> tuple:
        return layout.unpack(self.take(layout.size, what))


def checkpoint_from_bytes(payload: bytes) -> NetworkState:
    reader = _Reader(payload)
    magic, version, clusters, feature_len, dtype_code, mode_code, step = reader.unpack(_HEADER, "header")
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointVersionError("not a lumisel checkpoint", magic=magic.hex())
    if version != CHECKPOINT_VERSION:
        raise CheckpointVersionError(
            f"checkpoint version {version} is not supported (expected {CHECKPOINT_VERSION})",
            version=version,
        )
    if dtype_code not in _DTYPES or mode_code not in _MODES:
        raise CheckpointError("checkpoint header has unknown dtype or input mode", dtype=dtype_code, mode=mode_code)
    dtype = _DTYPES[dtype_code]
    resolution, features, *bounds = reader.unpack(_GRID, "grid header")
    (layer_count,) = reader.unpack(_COUNT, "layer count")
    shapes = [reader.unpack(_LAYER, f"layer {i} shape") for i in range(layer_count)]
    if not shapes or shapes[0][0] != feature_len or shapes[-1][1] != clusters:
        raise CheckpointError("checkpoint layer shapes disagree with its header")

    expected = {}
    for i, (fan_in, fan_out) in enumerate(shapes):
        expected[f"W{i}"] = (fan_in, fan_out)
        expected[f"b{i}"] = (fan_out,)
    expected[GRID_PARAM] = (resolution**3, features)

    params, m, v = {}, {}, {}
    for name in _param_order(layer_count):
        shape = expected[name]
        size = int(np.prod(shape)) * dtype.itemsize
        for target in (params, m, v):
            raw = reader.take(size, f"array '{name}'")
            target[name] = np.frombuffer(raw, dtype=dtype).reshape(shape).astype(dtype.newbyteorder("="))
    if reader.offset != len(payload):
        raise CheckpointError("checkpoint has trailing data", trailing=len(payload) - reader.offset)

    grid = GridEncoding(
        resolution=resolution,
        features=features,
        bounds_min=np.array(bounds[:3]),
        bounds_max=np.array(bounds[3:]),
        table=params[GRID_PARAM],
    )
    return NetworkState(
        params=params,
        grid_encoding=grid,
        input_mode=_MODES[mode_code],
        m=m,
        v=v,
        step=step,
    )


def checkpoint_load(path: str | Path) -> NetworkState:
    """
    Read a checkpoint written by `checkpoint_save`.

    Raises:
        CheckpointVersionError: Wrong magic or unsupported version.
        CheckpointTruncatedError: The file ends before every declared array.
        CheckpointError: Inconsistent header or trailing bytes.
    """
    path = Path(path)
    state = checkpoint_from_bytes(path.read_bytes())
    logger.info("Loaded checkpoint '%s' (S = %d, step %d).", path, state.cluster_count, state.step)
    return state
