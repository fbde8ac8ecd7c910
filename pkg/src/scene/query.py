"""Shading points: where light selection is conditioned and F is evaluated."""

from dataclasses import dataclass

import numpy as np

_UNIT_TOLERANCE = 1e-6


@dataclass(frozen=True)
class ShadingQuery:
    """Position, outgoing direction and normal at one shading point.

    ``normal`` is oriented towards ``out_dir``'s hemisphere by `trace_primary`.
    """

    position: np.ndarray
    out_dir: np.ndarray
    normal: np.ndarray
    bsdf_id: int

    def __post_init__(self):
        for name in ("out_dir", "normal"):
            length = float(np.linalg.norm(getattr(self, name)))
            if abs(length - 1.0) > _UNIT_TOLERANCE:
                raise ValueError(f"ShadingQuery.{name} must be unit length, got |v| = {length}")


@dataclass(frozen=True)
class ShadingBatch:
    """N shading queries as parallel arrays."""

    positions: np.ndarray  # (N, 3)
    out_dirs: np.ndarray  # (N, 3)
    normals: np.ndarray  # (N, 3)
    bsdf_ids: np.ndarray  # (N,)

    def __len__(self) -> int:
        return len(self.positions)

    def __getitem__(self, i: int) -> ShadingQuery:
        return ShadingQuery(
            self.positions[i], self.out_dirs[i], self.normals[i], int(self.bsdf_ids[i])
        )

    def subset(self, mask_or_index: np.ndarray) -> "ShadingBatch":
        return ShadingBatch(
            positions=self.positions[mask_or_index],
            out_dirs=self.out_dirs[mask_or_index],
            normals=self.normals[mask_or_index],
            bsdf_ids=self.bsdf_ids[mask_or_index],
        )

    @classmethod
    def from_queries(cls, queries: list[ShadingQuery]) -> "ShadingBatch":
        return cls(
            positions=np.array([q.position for q in queries], dtype=np.float64).reshape(-1, 3),
            out_dirs=np.array([q.out_dir for q in queries], dtype=np.float64).reshape(-1, 3),
            normals=np.array([q.normal for q in queries], dtype=np.float64).reshape(-1, 3),
            bsdf_ids=np.array([q.bsdf_id for q in queries], dtype=np.int64),
        )

    @classmethod
    def concatenate(cls, batches: list["ShadingBatch"]) -> "ShadingBatch":
        return cls(
            positions=np.concatenate([b.positions for b in batches]).reshape(-1, 3),
            out_dirs=np.concatenate([b.out_dirs for b in batches]).reshape(-1, 3),
            normals=np.concatenate([b.normals for b in batches]).reshape(-1, 3),
            bsdf_ids=np.concatenate([b.bsdf_ids for b in batches]).astype(np.int64),
        )
