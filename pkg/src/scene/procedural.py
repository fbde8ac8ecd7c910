"""Procedural desk-scale scenes: emitter grids over a floor with occluding partitions.

Two presets:

``desk``
    A jittered grid of small downward-facing emitters over a glossy floor split by
    random partition walls and a mirror ball. Neighbouring floor points on either
    side of a partition see different dominant lights.

``occlusion``
    The stress configuration: the emitters over the x < 0 half sit inside an opaque
    enclosure (a slab underneath plus a wall at x = 0), so half of all lights never
    reach any visible surface, while one large bright emitter dominates the open
    half. Hierarchy importance cannot see visibility, so it keeps spending samples
    on the enclosed lights.

Light index order is row-major over the grid (x fastest), followed by the dominant
light when present.
"""

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from scene.document import (
    CameraModel,
    MaterialModel,
    PointLightModel,
    QuadLightModel,
    QuadMeshModel,
    SceneDocument,
    SphereModel,
    TriangleLightModel,
    build_scene,
)
from scene.scene import Scene

_FLOOR_HALF = 1.0
_LIGHT_HEIGHT = 0.8
_ENCLOSURE_FLOOR = 0.7
_PARTITION_HEIGHT = 0.35


class ProceduralSceneSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    preset: Literal["desk", "occlusion"] = "desk"
    lights_x: int = Field(8, ge=1, description="Emitters along x")
    lights_z: int = Field(8, ge=1, description="Emitters along z")
    walls: int = Field(2, ge=0, description="Partition walls standing on the floor")
    light_kind: Literal["quad", "triangle", "point"] = "quad"
    light_size: float = Field(0.04, gt=0.0)
    seed: int = 0


def occlusion_preset(seed: int = 0, lights_x: int = 32, lights_z: int = 16) -> ProceduralSceneSpec:
    """The ≥512-emitter half-occluded stress configuration."""
    return ProceduralSceneSpec(
        preset="occlusion", lights_x=lights_x, lights_z=lights_z, walls=3, seed=seed
    )


def _emitter(kind: str, center: np.ndarray, size: float, emission: tuple[float, float, float]):
    half = size * 0.5
    corner = (float(center[0] - half), float(center[1]), float(center[2] - half))
    if kind == "point":
        # match the flux of the quad it replaces: Φ = π·L·A = 4π·I
        scale = size * size / 4.0
        return PointLightModel(
            position=tuple(float(c) for c in center),
            intensity=tuple(e * scale for e in emission),
        )
    if kind == "triangle":
        # (u, v) ordering keeps the normal pointing down (-y)
        return TriangleLightModel(
            vertices=(
                corner,
                (corner[0] + size, corner[1], corner[2]),
                (corner[0], corner[1], corner[2] + size),
            ),
            emission=emission,
        )
    return QuadLightModel(
        corner=corner, edge_u=(size, 0.0, 0.0), edge_v=(0.0, 0.0, size), emission=emission
    )


def procedural_document(spec: ProceduralSceneSpec) -> SceneDocument:
    """Deterministic `SceneDocument` for ``spec`` (same seed, same document)."""
    rng = np.random.default_rng(spec.seed)
    materials = [
        MaterialModel(name="floor", kind="rough-glossy", albedo=(0.7, 0.7, 0.7), roughness=0.45),
        MaterialModel(name="wall", kind="lambertian", albedo=(0.6, 0.55, 0.5)),
        MaterialModel(name="blocker", kind="lambertian", albedo=(0.2, 0.2, 0.2)),
        MaterialModel(name="mirror", kind="mirror", albedo=(0.9, 0.9, 0.9)),
    ]
    f = _FLOOR_HALF
    meshes: list = [
        QuadMeshModel(
            material="floor", corner=(-f, 0.0, f), edge_u=(2 * f, 0.0, 0.0), edge_v=(0.0, 0.0, -2 * f)
        ),
    ]

    for _ in range(spec.walls):
        x = float(rng.uniform(-0.7 * f, 0.7 * f))
        z0 = float(rng.uniform(-f, 0.0))
        length = float(rng.uniform(0.6, 1.0) * f)
        meshes.append(
            QuadMeshModel(
                material="wall",
                corner=(x, 0.0, z0),
                edge_u=(0.0, 0.0, length),
                edge_v=(0.0, _PARTITION_HEIGHT, 0.0),
            )
        )

    xs = np.linspace(-0.95 * f, 0.95 * f, spec.lights_x) if spec.lights_x > 1 else np.zeros(1)
    zs = np.linspace(-0.95 * f, 0.95 * f, spec.lights_z) if spec.lights_z > 1 else np.zeros(1)
    lights: list = []
    for z in zs:
        for x in xs:
            base = float(rng.uniform(0.5, 1.5))
            tint = rng.uniform(0.8, 1.2, size=3)
            if spec.preset == "occlusion" and x < 0.0:
                base *= 2.0
            jitter = rng.uniform(-0.2, 0.2, size=2) * (1.9 * f / max(spec.lights_x, 2))
            center = np.array([x + jitter[0] * (spec.preset == "desk"), _LIGHT_HEIGHT, z])
            if spec.preset == "occlusion":
                # keep the enclosed half strictly inside the enclosure
                center[0] = min(center[0], -spec.light_size) if x < 0.0 else max(center[0], spec.light_size)
            emission = tuple(float(base * t) * 25.0 for t in tint)
            lights.append(_emitter(spec.light_kind, center, spec.light_size, emission))

    if spec.preset == "occlusion":
        e = 1.1 * f
        meshes += [
            QuadMeshModel(
                material="blocker",
                corner=(-e, _ENCLOSURE_FLOOR, -e),
                edge_u=(e, 0.0, 0.0),
                edge_v=(0.0, 0.0, 2 * e),
            ),
            QuadMeshModel(
                material="blocker",
                corner=(0.0, _ENCLOSURE_FLOOR, -e),
                edge_u=(0.0, 0.0, 2 * e),
                edge_v=(0.0, 0.25, 0.0),
            ),
        ]
        lights.append(
            _emitter(spec.light_kind, np.array([0.5 * f, _LIGHT_HEIGHT - 0.05, 0.0]), 0.15, (400.0, 380.0, 340.0))
        )
    else:
        meshes.append(
            SphereModel(material="mirror", center=(0.55 * f, 0.15, 0.45 * f), radius=0.15)
        )

    if spec.preset == "occlusion":
        # below the enclosure so its lit top face stays out of view
        camera = CameraModel(position=(0.05, 0.6, 2.2), look_at=(0.0, 0.0, -0.3), fov_deg=50.0)
    else:
        camera = CameraModel(position=(0.0, 1.3, 2.4), look_at=(0.0, 0.0, 0.0), fov_deg=45.0)
    return SceneDocument(materials=materials, meshes=meshes, lights=lights, camera=camera)


def generate_procedural_scene(spec: ProceduralSceneSpec) -> Scene:
    """Build the procedural scene for ``spec``; deterministic for a fixed seed."""
    return build_scene(procedural_document(spec))
