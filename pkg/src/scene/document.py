"""Pydantic schema of the scene file and its conversion into a `Scene`.

The field names here are the file format; `docs/scene-format.md` documents them.
Unknown fields are rejected unless validation runs with ``context={"lenient": True}``.
"""

from pathlib import Path
from typing import Annotated, Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, model_validator

from scene.bsdf import Bsdf, BsdfKind
from scene.camera import Camera
from scene.lights import Light, LightKind
from scene.scene import Scene
from scene.spectrum import Spectrum
from utils.errors import SceneValidationError
from utils.logging import get_logger

logger = get_logger(__name__)

FORMAT_VERSION = 1
EMITTER_MATERIAL = "__emitter__"
_MIN_LIGHT_AREA = 1e-12

Finite = Annotated[float, Field(allow_inf_nan=False)]
NonNegative = Annotated[float, Field(ge=0.0, allow_inf_nan=False)]
Vec3 = tuple[Finite, Finite, Finite]
Rgb = tuple[NonNegative, NonNegative, NonNegative]


class _SceneModel(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    @model_validator(mode="before")
    @classmethod
    def _drop_unknown_when_lenient(cls, data: Any, info: ValidationInfo) -> Any:
        if not (isinstance(data, dict) and info.context and info.context.get("lenient")):
            return data
        known = set(cls.model_fields)
        dropped = sorted(k for k in data if k not in known)
        if dropped:
            logger.warning("Ignoring unknown %s fields: %s", cls.__name__, ", ".join(dropped))
        return {k: v for k, v in data.items() if k in known}


class MaterialModel(_SceneModel):
    name: str
    kind: Literal["lambertian", "rough-glossy", "mirror"] = "lambertian"
    albedo: Rgb = (0.8, 0.8, 0.8)
    roughness: Annotated[float, Field(gt=0.0, le=1.0)] = 1.0


class TriangleMeshModel(_SceneModel):
    kind: Literal["triangles"] = "triangles"
    material: str
    vertices: list[Vec3] | None = None
    indices: list[tuple[int, int, int]] | None = None
    vertices_file: str | None = Field(
        None, description="Sidecar little-endian float32 xyz buffer, relative to the scene file"
    )
    indices_file: str | None = Field(
        None, description="Sidecar little-endian uint32 index triples, relative to the scene file"
    )

    @model_validator(mode="after")
    def _one_vertex_source(self) -> "TriangleMeshModel":
        if (self.vertices is None) == (self.vertices_file is None):
            raise ValueError("exactly one of 'vertices' or 'vertices_file' is required")
        if self.indices is not None and self.indices_file is not None:
            raise ValueError("'indices' and 'indices_file' are mutually exclusive")
        return self


class QuadMeshModel(_SceneModel):
    kind: Literal["quad"] = "quad"
    material: str
    corner: Vec3
    edge_u: Vec3
    edge_v: Vec3


class SphereModel(_SceneModel):
    kind: Literal["sphere"] = "sphere"
    material: str
    center: Vec3
    radius: Annotated[float, Field(gt=0.0, allow_inf_nan=False)]


MeshModel = Annotated[
    TriangleMeshModel | QuadMeshModel | SphereModel, Field(discriminator="kind")
]


class PointLightModel(_SceneModel):
    kind: Literal["point"] = "point"
    position: Vec3
    intensity: Rgb


class TriangleLightModel(_SceneModel):
    kind: Literal["triangle"] = "triangle"
    vertices: tuple[Vec3, Vec3, Vec3]
    emission: Rgb
    two_sided: bool = False


class QuadLightModel(_SceneModel):
    kind: Literal["quad"] = "quad"
    corner: Vec3
    edge_u: Vec3
    edge_v: Vec3
    emission: Rgb
    two_sided: bool = False


LightModel = Annotated[
    PointLightModel | TriangleLightModel | QuadLightModel, Field(discriminator="kind")
]


class CameraModel(_SceneModel):
    position: Vec3
    look_at: Vec3
    up: Vec3 = (0.0, 1.0, 0.0)
    fov_deg: Annotated[float, Field(gt=0.0, lt=180.0)] = 45.0


class SceneDocument(_SceneModel):
    version: Literal[1] = FORMAT_VERSION
    materials: list[MaterialModel] = Field(default_factory=list)
    meshes: list[MeshModel] = Field(default_factory=list)
    lights: list[LightModel] = Field(min_length=1)
    camera: CameraModel


def _light_from_model(model: PointLightModel | TriangleLightModel | QuadLightModel) -> Light:
    if isinstance(model, PointLightModel):
        return Light(LightKind.POINT, Spectrum(*model.intensity), model.position)
    if isinstance(model, TriangleLightModel):
        p0, p1, p2 = (np.asarray(v) for v in model.vertices)
        return Light(
            LightKind.TRIANGLE,
            Spectrum(*model.emission),
            tuple(p0),
            tuple(p1 - p0),
            tuple(p2 - p0),
            model.two_sided,
        )
    return Light(
        LightKind.QUAD,
        Spectrum(*model.emission),
        model.corner,
        model.edge_u,
        model.edge_v,
        model.two_sided,
    )


def _light_triangles(light: Light) -> list[np.ndarray]:
    o = np.asarray(light.origin)
    u = np.asarray(light.edge_u)
    v = np.asarray(light.edge_v)
    if light.kind == LightKind.TRIANGLE:
        return [np.stack([o, o + u, o + v])]
    if light.kind == LightKind.QUAD:
        return [np.stack([o, o + u, o + u + v]), np.stack([o, o + u + v, o + v])]
    return []


def _quad_triangles(model: QuadMeshModel) -> np.ndarray:
    o, u, v = (np.asarray(x) for x in (model.corner, model.edge_u, model.edge_v))
    return np.stack([np.stack([o, o + u, o + u + v]), np.stack([o, o + u + v, o + v])])


def _mesh_triangles(model: TriangleMeshModel, base_dir: Path) -> np.ndarray:
    if model.vertices is not None:
        vertices = np.asarray(model.vertices, dtype=np.float64).reshape(-1, 3)
    else:
        raw = np.fromfile(base_dir / model.vertices_file, dtype="<f4")
        if raw.size % 3:
            raise SceneValidationError(
                "Vertex buffer length is not a multiple of 3", file=model.vertices_file
            )
        vertices = raw.astype(np.float64).reshape(-1, 3)
    if model.indices is not None:
        indices = np.asarray(model.indices, dtype=np.int64).reshape(-1, 3)
    elif model.indices_file is not None:
        raw_idx = np.fromfile(base_dir / model.indices_file, dtype="<u4")
        if raw_idx.size % 3:
            raise SceneValidationError(
                "Index buffer length is not a multiple of 3", file=model.indices_file
            )
        indices = raw_idx.astype(np.int64).reshape(-1, 3)
    else:
        if len(vertices) % 3:
            raise SceneValidationError("Unindexed vertex count is not a multiple of 3")
        indices = np.arange(len(vertices)).reshape(-1, 3)
    if indices.size and (indices.min() < 0 or indices.max() >= len(vertices)):
        raise SceneValidationError(
            "Mesh index out of range", vertex_count=len(vertices), max_index=int(indices.max())
        )
    return vertices[indices]


def build_scene(document: SceneDocument, base_dir: Path | str = ".") -> Scene:
    """Validate cross references and assemble the renderable `Scene`.

    Light indices follow the order of ``document.lights``. Area lights are also
    inserted as emitter triangles so that camera rays can see them and they occlude.

    Raises:
        SceneValidationError: Unknown material names, duplicate material names,
            degenerate (zero-area) lights, bad sidecar buffers.
    """
    base_dir = Path(base_dir)
    names = [m.name for m in document.materials]
    if len(set(names)) != len(names):
        raise SceneValidationError("Duplicate material names", materials=names)
    if EMITTER_MATERIAL in names:
        raise SceneValidationError(f"Material name '{EMITTER_MATERIAL}' is reserved")
    bsdfs = [Bsdf(BsdfKind.parse(m.kind), Spectrum(*m.albedo), m.roughness) for m in document.materials]
    material_index = {name: i for i, name in enumerate(names)}
    emitter_bsdf = len(bsdfs)
    bsdfs.append(Bsdf(BsdfKind.LAMBERTIAN, Spectrum(0.0, 0.0, 0.0)))
    names.append(EMITTER_MATERIAL)

    triangles: list[np.ndarray] = []
    triangle_bsdf: list[int] = []
    triangle_light: list[int] = []
    spheres: list[tuple[float, float, float, float]] = []
    sphere_bsdf: list[int] = []
    for i, mesh in enumerate(document.meshes):
        if mesh.material not in material_index:
            raise SceneValidationError(
                f"Mesh {i} references unknown material '{mesh.material}'", mesh=i
            )
        bsdf = material_index[mesh.material]
        if isinstance(mesh, SphereModel):
            spheres.append((*mesh.center, mesh.radius))
            sphere_bsdf.append(bsdf)
            continue
        tris = _quad_triangles(mesh) if isinstance(mesh, QuadMeshModel) else _mesh_triangles(mesh, base_dir)
        triangles.extend(tris)
        triangle_bsdf.extend([bsdf] * len(tris))
        triangle_light.extend([-1] * len(tris))

    lights = [_light_from_model(model) for model in document.lights]
    for index, light in enumerate(lights):
        if light.kind != LightKind.POINT and light.area <= _MIN_LIGHT_AREA:
            raise SceneValidationError(
                f"Light {index} is degenerate (area {light.area:.3g})", light=index
            )
        tris = _light_triangles(light)
        triangles.extend(tris)
        triangle_bsdf.extend([emitter_bsdf] * len(tris))
        triangle_light.extend([index] * len(tris))

    cam = document.camera
    camera = Camera(
        position=np.asarray(cam.position, dtype=np.float64),
        look_at=np.asarray(cam.look_at, dtype=np.float64),
        up=np.asarray(cam.up, dtype=np.float64),
        fov_deg=cam.fov_deg,
    )
    scene = Scene(
        bsdfs=bsdfs,
        triangles=np.asarray(triangles, dtype=np.float64).reshape(-1, 3, 3),
        triangle_bsdf=np.asarray(triangle_bsdf, dtype=np.int64),
        triangle_light=np.asarray(triangle_light, dtype=np.int64),
        spheres=np.asarray(spheres, dtype=np.float64).reshape(-1, 4),
        sphere_bsdf=np.asarray(sphere_bsdf, dtype=np.int64),
        lights=lights,
        camera=camera,
        material_names=names,
    )
    logger.info(
        "Scene built: %d triangles (%d BVH nodes), %d spheres, %d lights.",
        len(scene.v0),
        scene.bvh.node_count,
        len(scene.spheres),
        scene.light_count,
    )
    return scene
