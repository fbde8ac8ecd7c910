"""Emitters and uniform point sampling on their surfaces."""

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from scene.geometry import normalize
from scene.spectrum import Spectrum, luminance


class LightKind(IntEnum):
    POINT = 0
    TRIANGLE = 1
    QUAD = 2


@dataclass(frozen=True)
class Light:
    """One emitter.

    Geometry is ``origin`` plus the two edge vectors: a triangle spans
    ``origin, origin + edge_u, origin + edge_v``; a quad is the parallelogram
    ``origin + s·edge_u + t·edge_v`` for s, t in [0, 1]. Point lights ignore the
    edges. ``emission`` is radiance for area lights and intensity for point lights.
    Area lights emit on the side of ``edge_u × edge_v`` unless ``two_sided``.
    """

    kind: LightKind
    emission: Spectrum
    origin: tuple[float, float, float]
    edge_u: tuple[float, float, float] = (0.0, 0.0, 0.0)
    edge_v: tuple[float, float, float] = (0.0, 0.0, 0.0)
    two_sided: bool = False

    @property
    def area(self) -> float:
        cross = np.linalg.norm(np.cross(self.edge_u, self.edge_v))
        if self.kind == LightKind.TRIANGLE:
            return float(0.5 * cross)
        if self.kind == LightKind.QUAD:
            return float(cross)
        return 0.0


@dataclass(frozen=True)
class LightSamplePoint:
    point: np.ndarray
    pdf_area: float
    normal_at_light: np.ndarray


@dataclass(frozen=True)
class LightSampleBatch:
    """Batched `LightSamplePoint`s, one per requested light index."""

    points: np.ndarray  # (N, 3)
    pdf_area: np.ndarray  # (N,)
    normals: np.ndarray  # (N, 3)

    def __getitem__(self, i: int) -> LightSamplePoint:
        return LightSamplePoint(self.points[i], float(self.pdf_area[i]), self.normals[i])


@dataclass(frozen=True)
class LightTable:
    """Struct-of-arrays over all lights; index order is the scene's light order."""

    kind: np.ndarray  # (M,)
    origin: np.ndarray  # (M, 3)
    edge_u: np.ndarray
    edge_v: np.ndarray
    normal: np.ndarray  # (M, 3), +z for point lights
    area: np.ndarray  # (M,)
    emission: np.ndarray  # (M, 3)
    two_sided: np.ndarray  # (M,) bool
    power: np.ndarray  # (M,)

    @classmethod
    def from_lights(cls, lights: list[Light]) -> "LightTable":
        kind = np.array([int(light.kind) for light in lights], dtype=np.int64)
        origin = np.array([light.origin for light in lights], dtype=np.float64).reshape(-1, 3)
        edge_u = np.array([light.edge_u for light in lights], dtype=np.float64).reshape(-1, 3)
        edge_v = np.array([light.edge_v for light in lights], dtype=np.float64).reshape(-1, 3)
        normal = normalize(np.cross(edge_u, edge_v))
        normal[kind == LightKind.POINT] = (0.0, 0.0, 1.0)
        emission = np.array([light.emission.as_array() for light in lights]).reshape(-1, 3)
        two_sided = np.array([light.two_sided for light in lights], dtype=bool)
        area = np.array([light.area for light in lights], dtype=np.float64)
        y = luminance(emission)
        power = np.where(
            kind == LightKind.POINT,
            4.0 * np.pi * y,
            np.pi * y * area * np.where(two_sided, 2.0, 1.0),
        )
        return cls(
            kind=kind,
            origin=origin,
            edge_u=edge_u,
            edge_v=edge_v,
            normal=normal,
            area=area,
            emission=emission,
            two_sided=two_sided,
            power=power,
        )

    def __len__(self) -> int:
        return len(self.kind)

    def centroids(self) -> np.ndarray:
        third = np.where(self.kind == LightKind.TRIANGLE, 1.0 / 3.0, 0.5)[:, None]
        return np.where(
            (self.kind == LightKind.POINT)[:, None],
            self.origin,
            self.origin + third * (self.edge_u + self.edge_v),
        )

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-light AABBs, (M, 3) each."""
        corners = np.stack(
            [
                self.origin,
                self.origin + self.edge_u,
                self.origin + self.edge_v,
                self.origin
                + self.edge_u
                + np.where((self.kind == LightKind.QUAD)[:, None], self.edge_v, 0.0),
            ],
            axis=1,
        )
        return corners.min(axis=1), corners.max(axis=1)

    def sample_points(self, lights: np.ndarray, u: np.ndarray) -> LightSampleBatch:
        """Uniform area sampling on each requested light.

        ``u`` is (N, 2) in [0, 1)². Point lights return their position with the
        delta convention ``pdf_area = 1``.
        """
        kind = self.kind[lights]
        origin = self.origin[lights]
        eu = self.edge_u[lights]
        ev = self.edge_v[lights]
        u0 = u[:, 0]
        u1 = u[:, 1]
        # square-root warp for triangles (uniform barycentrics)
        su = np.sqrt(u0)
        tri_a = su * (1.0 - u1)
        tri_b = su * u1
        a = np.where(kind == LightKind.TRIANGLE, tri_a, u0)
        b = np.where(kind == LightKind.TRIANGLE, tri_b, u1)
        area_points = origin + a[:, None] * eu + b[:, None] * ev
        is_point = kind == LightKind.POINT
        points = np.where(is_point[:, None], origin, area_points)
        pdf = 1.0 / np.where(is_point, 1.0, self.area[lights])
        return LightSampleBatch(points=points, pdf_area=pdf, normals=self.normal[lights])
