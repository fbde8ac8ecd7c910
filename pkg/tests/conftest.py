import numpy as np
import pytest

from app.settings import get_settings
from lighttree.cut import select_cut
from lighttree.tree import build_tree
from scene.document import (
    CameraModel,
    MaterialModel,
    PointLightModel,
    QuadLightModel,
    QuadMeshModel,
    SceneDocument,
    build_scene,
)
from scene.lights import Light, LightKind, LightTable
from scene.procedural import ProceduralSceneSpec, generate_procedural_scene
from scene.query import ShadingBatch
from scene.spectrum import Spectrum

FLOOR = QuadMeshModel(material="floor", corner=(-1.0, 0.0, 1.0), edge_u=(2.0, 0.0, 0.0), edge_v=(0.0, 0.0, -2.0))
CAMERA = CameraModel(position=(0.0, 1.3, 2.4), look_at=(0.0, 0.0, 0.0))


def floor_query_batch(n: int = 1, position=(0.1, 0.0, 0.2)) -> ShadingBatch:
    """``n`` copies of one shading point on the floor of the small test scenes (bsdf 0)."""
    out_dir = np.array([0.0, 0.6, 0.8])
    return ShadingBatch(
        positions=np.tile(np.asarray(position, dtype=np.float64), (n, 1)),
        out_dirs=np.tile(out_dir, (n, 1)),
        normals=np.tile([0.0, 1.0, 0.0], (n, 1)),
        bsdf_ids=np.zeros(n, dtype=np.int64),
    )


def random_lights(count: int, seed: int = 0) -> list[Light]:
    """A mix of downward quads, triangles and point lights scattered over a box."""
    rng = np.random.default_rng(seed)
    lights = []
    for i in range(count):
        origin = tuple(float(x) for x in rng.uniform([-1.0, 0.5, -1.0], [1.0, 1.0, 1.0]))
        emission = Spectrum(*(float(x) for x in rng.uniform(0.5, 5.0, size=3)))
        size = float(rng.uniform(0.02, 0.1))
        kind = (LightKind.QUAD, LightKind.TRIANGLE, LightKind.POINT)[i % 3]
        if kind == LightKind.POINT:
            lights.append(Light(kind, emission, origin))
        else:
            lights.append(Light(kind, emission, origin, (size, 0.0, 0.0), (0.0, 0.0, size), two_sided=i % 5 == 0))
    return lights


@pytest.fixture
def light_table() -> LightTable:
    return LightTable.from_lights(random_lights(40, seed=7))


@pytest.fixture
def tree(light_table):
    return build_tree(light_table)


@pytest.fixture
def cut(tree):
    return select_cut(tree, 3)


@pytest.fixture(scope="session")
def desk_scene():
    return generate_procedural_scene(ProceduralSceneSpec(preset="desk", lights_x=4, lights_z=3, walls=1, seed=3))


@pytest.fixture(scope="session")
def point_light_scene():
    """Desk layout with point emitters only, so every light's contribution is deterministic."""
    return generate_procedural_scene(
        ProceduralSceneSpec(preset="desk", lights_x=4, lights_z=4, walls=2, light_kind="point", seed=11)
    )


@pytest.fixture
def single_point_light_scene():
    """Lambertian floor (albedo 0.5) under one point light of intensity 10 at height 2."""
    document = SceneDocument(
        materials=[MaterialModel(name="floor", albedo=(0.5, 0.5, 0.5))],
        meshes=[FLOOR],
        lights=[PointLightModel(position=(0.0, 2.0, 0.0), intensity=(10.0, 10.0, 10.0))],
        camera=CAMERA,
    )
    return build_scene(document)


@pytest.fixture
def quad_light_document() -> SceneDocument:
    return SceneDocument(
        materials=[MaterialModel(name="floor", albedo=(0.7, 0.7, 0.7))],
        meshes=[FLOOR],
        lights=[
            QuadLightModel(
                corner=(-0.1, 0.8, -0.1), edge_u=(0.2, 0.0, 0.0), edge_v=(0.0, 0.0, 0.2), emission=(5.0, 5.0, 5.0)
            )
        ],
        camera=CAMERA,
    )


@pytest.fixture
def cache_env(tmp_path, monkeypatch):
    """Point the reference cache at a temp dir and drop the cached settings around the test."""
    monkeypatch.setenv("LUMISEL_CACHE_DIR", str(tmp_path / "cache"))
    monkeypatch.delenv("LUMISEL_THREADS", raising=False)
    get_settings.cache_clear()
    yield tmp_path / "cache"
    get_settings.cache_clear()
