import json
import math

import numpy as np
import pytest

from conftest import CAMERA, FLOOR, floor_query_batch
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
from scene.lights import Light, LightKind, LightSampleBatch, LightTable
from scene.loader import load_scene, parse_scene_document, write_scene_document
from scene.procedural import ProceduralSceneSpec, occlusion_preset, procedural_document
from scene.query import ShadingBatch, ShadingQuery
from scene.spectrum import Spectrum
from utils.errors import SceneParseError, SceneValidationError

MINIMAL = {
    "materials": [{"name": "floor"}],
    "meshes": [
        {"kind": "quad", "material": "floor", "corner": [-1, 0, 1], "edge_u": [2, 0, 0], "edge_v": [0, 0, -2]}
    ],
    "lights": [{"kind": "point", "position": [0, 2, 0], "intensity": [1, 1, 1]}],
    "camera": {"position": [0, 1, 3], "look_at": [0, 0, 0]},
}


def test_parse_minimal_document_applies_defaults():
    document = parse_scene_document(json.dumps(MINIMAL))

    assert document.materials[0].kind == "lambertian"
    assert document.camera.fov_deg == 45.0
    assert document.camera.up == (0.0, 1.0, 0.0)


def test_malformed_json_reports_line_and_column():
    text = '{\n  "materials": [,\n}'

    with pytest.raises(SceneParseError) as info:
        parse_scene_document(text)

    assert info.value.line == 2
    assert info.value.column is not None
    assert info.value.exit_code == 2


def test_unknown_field_rejected_unless_lenient():
    data = json.loads(json.dumps(MINIMAL))
    data["lights"][0]["colour"] = "red"

    with pytest.raises(SceneParseError) as info:
        parse_scene_document(json.dumps(data))
    assert "lights.0" in info.value.field

    document = parse_scene_document(json.dumps(data), lenient=True)
    assert document.lights[0].intensity == (1.0, 1.0, 1.0)


def test_negative_emission_rejected():
    data = json.loads(json.dumps(MINIMAL))
    data["lights"][0]["intensity"] = [1, -1, 1]

    with pytest.raises(SceneParseError):
        parse_scene_document(json.dumps(data))


def test_degenerate_area_light_rejected():
    data = json.loads(json.dumps(MINIMAL))
    data["lights"].append(
        {"kind": "quad", "corner": [0, 1, 0], "edge_u": [1, 0, 0], "edge_v": [2, 0, 0], "emission": [1, 1, 1]}
    )

    with pytest.raises(SceneValidationError) as info:
        build_scene(parse_scene_document(json.dumps(data)))
    assert info.value.context["light"] == 1


def test_unknown_material_rejected():
    data = json.loads(json.dumps(MINIMAL))
    data["meshes"][0]["material"] = "marble"

    with pytest.raises(SceneValidationError):
        build_scene(parse_scene_document(json.dumps(data)))


def test_sidecar_buffers(tmp_path):
    vertices = np.array([[-1, 0, -1], [1, 0, -1], [1, 0, 1], [-1, 0, 1]], dtype="<f4")
    indices = np.array([[0, 2, 1], [0, 3, 2]], dtype="<u4")
    vertices.tofile(tmp_path / "floor.f32")
    indices.tofile(tmp_path / "floor.u32")
    data = json.loads(json.dumps(MINIMAL))
    data["meshes"] = [
        {"kind": "triangles", "material": "floor", "vertices_file": "floor.f32", "indices_file": "floor.u32"}
    ]
    path = tmp_path / "scene.json"
    path.write_text(json.dumps(data))

    scene = load_scene(path)

    assert len(scene.v0) == 2
    hit = scene.intersect(np.array([0.2, 1.0, 0.3]), np.array([0.0, -1.0, 0.0]))
    assert hit is not None
    np.testing.assert_allclose(hit.position, [0.2, 0.0, 0.3], atol=1e-9)


def test_sidecar_index_out_of_range(tmp_path):
    np.zeros((3, 3), dtype="<f4").tofile(tmp_path / "v.f32")
    np.array([0, 1, 5], dtype="<u4").tofile(tmp_path / "i.u32")
    data = json.loads(json.dumps(MINIMAL))
    data["meshes"] = [{"kind": "triangles", "material": "floor", "vertices_file": "v.f32", "indices_file": "i.u32"}]
    path = tmp_path / "scene.json"
    path.write_text(json.dumps(data))

    with pytest.raises(SceneValidationError):
        load_scene(path)


def test_written_document_loads_back_to_the_same_scene(tmp_path, quad_light_document):
    path = write_scene_document(quad_light_document, tmp_path / "quad.json")

    assert load_scene(path).content_hash == build_scene(quad_light_document).content_hash


def test_light_order_follows_document():
    quad = {"kind": "quad", "corner": [0, 1, 0], "edge_u": [0.1, 0, 0], "edge_v": [0, 0, 0.1], "emission": [1, 1, 1]}
    scene = build_scene(parse_scene_document(json.dumps({**MINIMAL, "lights": [quad, *MINIMAL["lights"]]})))

    assert [light.kind for light in scene.lights] == [LightKind.QUAD, LightKind.POINT]
    assert scene.light_table.kind.tolist() == [LightKind.QUAD, LightKind.POINT]
    assert set(scene.triangle_light[scene.triangle_light >= 0].tolist()) == {0}


def test_light_power():
    table = LightTable.from_lights(
        [
            Light(LightKind.POINT, Spectrum(1.0, 1.0, 1.0), (0.0, 2.0, 0.0)),
            Light(LightKind.QUAD, Spectrum(2.0, 2.0, 2.0), (0.0, 1.0, 0.0), (0.5, 0.0, 0.0), (0.0, 0.0, 0.2)),
            Light(LightKind.QUAD, Spectrum(2.0, 2.0, 2.0), (0.0, 1.0, 0.0), (0.5, 0.0, 0.0), (0.0, 0.0, 0.2), True),
        ]
    )

    # 4π·I for points, π·L·A per emitting side for area lights
    np.testing.assert_allclose(table.power, [4.0 * np.pi, np.pi * 2.0 * 0.1, 2.0 * np.pi * 2.0 * 0.1])


def test_quad_samples_stay_on_the_light(quad_light_document):
    scene = build_scene(quad_light_document)
    u = np.random.default_rng(0).random((2000, 2))

    samples = scene.sample_light_points(np.zeros(2000, dtype=np.int64), u)

    assert np.all(samples.points[:, 0] >= -0.1) and np.all(samples.points[:, 0] <= 0.1)
    np.testing.assert_allclose(samples.points[:, 1], 0.8)
    np.testing.assert_allclose(samples.pdf_area, 1.0 / 0.04)
    np.testing.assert_allclose(samples.normals, np.tile([0.0, -1.0, 0.0], (2000, 1)))


def test_triangle_samples_are_uniform():
    triangle = {"kind": "triangle", "vertices": [[0, 1, 0], [1, 1, 0], [0, 1, 1]], "emission": [1, 1, 1]}
    scene = build_scene(parse_scene_document(json.dumps({**MINIMAL, "lights": [triangle]})))
    u = np.random.default_rng(1).random((20000, 2))

    samples = scene.sample_light_points(np.zeros(20000, dtype=np.int64), u)

    p = samples.points
    assert np.all(p[:, 0] + p[:, 2] <= 1.0 + 1e-12)
    np.testing.assert_allclose(p.mean(axis=0), [1.0 / 3.0, 1.0, 1.0 / 3.0], atol=0.01)
    # a uniform density puts a quarter of the mass in the corner triangle below x + z = 1/2
    assert np.mean(p[:, 0] + p[:, 2] < 0.5) == pytest.approx(0.25, abs=0.015)
    np.testing.assert_allclose(samples.pdf_area, 2.0)


def test_point_light_integrand_matches_closed_form(single_point_light_scene):
    scene = single_point_light_scene
    queries = floor_query_batch(1, position=(0.0, 0.0, 0.0))
    samples = scene.sample_light_points(np.array([0]), np.zeros((1, 2)))

    f = scene.eval_F_batch(queries, np.array([0]), samples)

    # I · ρ/π · cosθ / d² with cosθ = 1, d = 2
    np.testing.assert_allclose(f[0], 10.0 * 0.5 / np.pi / 4.0)
    assert samples.pdf_area[0] == 1.0


def test_integrand_zero_below_the_surface(single_point_light_scene):
    scene = single_point_light_scene
    queries = floor_query_batch(1, position=(0.0, 0.0, 0.0))
    flipped = queries.subset(np.array([0]))
    flipped.normals[:] = (0.0, -1.0, 0.0)
    samples = scene.sample_light_points(np.array([0]), np.zeros((1, 2)))

    assert scene.eval_F_batch(flipped, np.array([0]), samples)[0].tolist() == [0.0, 0.0, 0.0]


def test_occluder_blocks_the_integrand(single_point_light_scene):
    scene = single_point_light_scene
    query = floor_query_batch(1, position=(0.0, 0.0, 0.0))[0]
    sample = scene.sample_light_point(0, (0.0, 0.0))
    assert not scene.eval_F(query, 0, sample).is_black()

    blocked = build_scene(
        SceneDocument(
            materials=[MaterialModel(name="floor"), MaterialModel(name="slab")],
            meshes=[
                FLOOR,
                QuadMeshModel(material="slab", corner=(-0.5, 1.0, -0.5), edge_u=(1.0, 0.0, 0.0), edge_v=(0.0, 0.0, 1.0)),
            ],
            lights=[PointLightModel(position=(0.0, 2.0, 0.0), intensity=(10.0, 10.0, 10.0))],
            camera=CAMERA,
        )
    )
    assert blocked.eval_F(query, 0, sample) == Spectrum(0.0, 0.0, 0.0)
    assert not blocked.visible(np.zeros(3), np.array([0.0, 2.0, 0.0]))
    assert blocked.visible(np.zeros(3), np.array([0.9, 0.5, 0.9]))


def test_bvh_matches_brute_force(desk_scene):
    rng = np.random.default_rng(5)
    origins = rng.uniform(-1.2, 1.2, size=(500, 3)) + np.array([0.0, 0.6, 0.0])
    dirs = rng.normal(size=(500, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)

    fast = desk_scene.intersect_batch(origins, dirs)
    slow = desk_scene.intersect_batch(origins, dirs, brute_force=True)

    np.testing.assert_array_equal(fast.hit, slow.hit)
    np.testing.assert_allclose(fast.t[fast.hit], slow.t[slow.hit], rtol=1e-12)
    np.testing.assert_array_equal(fast.light_index, slow.light_index)


def test_camera_sees_area_lights_as_geometry(quad_light_document):
    scene = build_scene(quad_light_document)
    hit = scene.intersect(np.array([0.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]))

    assert hit is not None and hit.is_emitter and hit.light_index == 0
    radiance = scene.emitted_towards(np.array([0]), np.array([[0.0, -1.0, 0.0]]))
    np.testing.assert_allclose(radiance[0], [5.0, 5.0, 5.0])
    # one-sided: nothing leaves the back face
    assert scene.emitted_towards(np.array([0]), np.array([[0.0, 1.0, 0.0]]))[0].tolist() == [0.0, 0.0, 0.0]


def test_procedural_scenes_are_deterministic():
    spec = ProceduralSceneSpec(preset="desk", lights_x=3, lights_z=3, seed=4)

    assert procedural_document(spec) == procedural_document(spec)
    assert procedural_document(spec) != procedural_document(spec.model_copy(update={"seed": 5}))


def test_occlusion_preset_has_many_lights_and_a_dominant_one():
    document = procedural_document(occlusion_preset())
    scene = build_scene(document)

    assert scene.light_count >= 512
    power = scene.light_table.power
    assert power[-1] == power.max()
    assert power[-1] > 10.0 * np.median(power)


def _two_light_document(scale: float = 1.0) -> SceneDocument:
    """Glossy floor under a downward quad and a downward triangle, all coordinates times ``scale``."""

    def s(v):
        return tuple(scale * c for c in v)

    return SceneDocument(
        materials=[MaterialModel(name="floor", kind="rough-glossy", albedo=(0.6, 0.5, 0.4), roughness=0.4)],
        meshes=[QuadMeshModel(material="floor", corner=s((-1, 0, 1)), edge_u=s((2, 0, 0)), edge_v=s((0, 0, -2)))],
        lights=[
            QuadLightModel(corner=s((-0.6, 1.0, -0.2)), edge_u=s((0.3, 0, 0)), edge_v=s((0, 0, 0.3)), emission=(4, 3, 2)),
            TriangleLightModel(
                vertices=(s((0.3, 1.0, -0.1)), s((0.6, 1.0, -0.1)), s((0.3, 1.0, 0.2))), emission=(1, 2, 6)
            ),
        ],
        camera=CameraModel(position=s((0, 1.3, 2.4)), look_at=(0.0, 0.0, 0.0)),
    )


def _upper_hemisphere(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=(n, 3))
    v[:, 1] = np.abs(v[:, 1]) + 1e-3
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def test_integrand_over_pdf_is_invariant_under_scene_scaling():
    rng = np.random.default_rng(8)
    n = 400
    positions = np.column_stack([rng.uniform(-0.9, 0.9, n), np.zeros(n), rng.uniform(-0.9, 0.9, n)])
    out_dirs = _upper_hemisphere(rng, n)
    lights = np.arange(n) % 2
    u = rng.random((n, 2))

    ratios = []
    for scale in (1.0, 2.0):
        scene = build_scene(_two_light_document(scale))
        queries = ShadingBatch(
            positions=scale * positions,
            out_dirs=out_dirs,
            normals=np.tile([0.0, 1.0, 0.0], (n, 1)),
            bsdf_ids=np.zeros(n, dtype=np.int64),
        )
        samples = scene.sample_light_points(lights, u)
        ratios.append(scene.eval_F_batch(queries, lights, samples) / samples.pdf_area[:, None])

    assert np.mean(np.any(ratios[0] > 0.0, axis=1)) > 0.25
    np.testing.assert_allclose(ratios[1], ratios[0], rtol=1e-5, atol=1e-12)


def test_visibility_is_symmetric_and_matches_brute_force_rays(desk_scene):
    scene = desk_scene
    rng = np.random.default_rng(12)
    n = 1000
    a = rng.uniform(scene.bounds_min, scene.bounds_max, size=(n, 3))
    b = rng.uniform(scene.bounds_min, scene.bounds_max, size=(n, 3))

    forward = scene.visible_batch(a, b)
    backward = scene.visible_batch(b, a)

    np.testing.assert_array_equal(forward, backward)
    d = b - a
    dist = np.linalg.norm(d, axis=1)
    blocked = scene.intersect_batch(a, d / dist[:, None], t_max=dist - scene.ray_epsilon, brute_force=True).hit
    np.testing.assert_array_equal(forward, ~blocked)
    assert 0 < forward.sum() < n


def _midpoint_quadrature(scene, query: ShadingBatch, light: int, cells: int = 64) -> np.ndarray:
    """∫ F dA over light ``light`` on a cells × cells midpoint grid of its parameter square."""
    table = scene.light_table
    origin, eu, ev = table.origin[light], table.edge_u[light], table.edge_v[light]
    s, t = np.meshgrid((np.arange(cells) + 0.5) / cells, (np.arange(cells) + 0.5) / cells, indexing="ij")
    s, t = s.ravel(), t.ravel()
    if table.kind[light] == LightKind.TRIANGLE:
        # (s, t) -> barycentrics (s(1 - t), st) has Jacobian s over a parameter triangle of twice the area
        a, b = s * (1.0 - t), s * t
        weights = 2.0 * table.area[light] * s / cells**2
    else:
        a, b = s, t
        weights = np.full(len(s), table.area[light] / cells**2)
    m = len(s)
    points = origin + a[:, None] * eu + b[:, None] * ev
    samples = LightSampleBatch(points=points, pdf_area=np.ones(m), normals=np.tile(table.normal[light], (m, 1)))
    lights = np.full(m, light, dtype=np.int64)
    f = scene.eval_F_batch(query.subset(np.zeros(m, dtype=np.int64)), lights, samples)
    return (f * weights[:, None]).sum(axis=0)


@pytest.mark.parametrize("light", [0, 1])
def test_area_sampling_converges_to_the_quadrature(light):
    scene = build_scene(_two_light_document())
    query = ShadingBatch(
        positions=np.array([[-0.1, 0.0, 0.3]]),
        out_dirs=np.array([[0.0, 0.6, -0.8]]),
        normals=np.array([[0.0, 1.0, 0.0]]),
        bsdf_ids=np.array([0]),
    )
    expected = _midpoint_quadrature(scene, query, light)
    n = 20_000
    lights = np.full(n, light, dtype=np.int64)
    samples = scene.sample_light_points(lights, np.random.default_rng(light).random((n, 2)))

    estimates = scene.eval_F_batch(query.subset(np.zeros(n, dtype=np.int64)), lights, samples)
    estimates /= samples.pdf_area[:, None]

    assert np.all(expected > 0.0)
    stderr = estimates.std(axis=0, ddof=1) / np.sqrt(n)
    assert np.all(np.abs(estimates.mean(axis=0) - expected) <= 3.0 * stderr)


def test_lambertian_under_a_patch_at_distance_d():
    d = 0.5
    scene = build_scene(
        SceneDocument(
            materials=[MaterialModel(name="floor", albedo=(1.0, 1.0, 1.0))],
            meshes=[FLOOR],
            lights=[
                QuadLightModel(
                    corner=(-0.1, d, -0.1), edge_u=(0.2, 0.0, 0.0), edge_v=(0.0, 0.0, 0.2), emission=(1.0, 1.0, 1.0)
                )
            ],
            camera=CAMERA,
        )
    )
    query = floor_query_batch(1, position=(0.0, 0.0, 0.0))[0]

    f = scene.eval_F(query, 0, scene.sample_light_point(0, (0.5, 0.5)))

    np.testing.assert_allclose(f.as_array(), 1.0 / (np.pi * d * d))


def _glossy_integrand(x, n, wo, y, n_light, emission, albedo, exponent):
    """Scalar reference for L · f_s · cosθ_x · cosθ_l / d² under the glossy lobe."""
    d = [y[i] - x[i] for i in range(3)]
    dist2 = sum(c * c for c in d)
    wi = [c / math.sqrt(dist2) for c in d]
    cos_x = sum(n[i] * wi[i] for i in range(3))
    cos_l = -sum(n_light[i] * wi[i] for i in range(3))
    cos_o = sum(n[i] * wo[i] for i in range(3))
    if cos_x <= 0.0 or cos_l <= 0.0 or cos_o <= 0.0:
        return [0.0, 0.0, 0.0]
    mirrored = [2.0 * cos_o * n[i] - wo[i] for i in range(3)]
    cos_alpha = max(sum(mirrored[i] * wi[i] for i in range(3)), 0.0)
    lobe = (exponent + 2.0) / (2.0 * math.pi) * cos_alpha**exponent
    return [emission[c] * albedo[c] * lobe * cos_x * cos_l / dist2 for c in range(3)]


def test_glossy_integrand_matches_a_scalar_reference():
    rng = np.random.default_rng(21)
    lit = 0

    for _ in range(25):
        roughness = float(rng.uniform(0.2, 1.0))
        albedo = tuple(float(c) for c in rng.uniform(0.1, 0.9, 3))
        emission = tuple(float(c) for c in rng.uniform(0.5, 5.0, 3))
        corner = tuple(float(c) for c in rng.uniform([-0.5, 0.6, -0.5], [0.5, 1.2, 0.5]))
        eu = rng.uniform([-0.3, -0.1, -0.3], [0.3, 0.1, 0.3])
        ev = rng.uniform([-0.3, -0.1, -0.3], [0.3, 0.1, 0.3])
        if np.cross(eu, ev)[1] > 0.0:
            eu, ev = ev, eu
        scene = build_scene(
            SceneDocument(
                materials=[MaterialModel(name="floor", kind="rough-glossy", albedo=albedo, roughness=roughness)],
                meshes=[FLOOR],
                lights=[
                    QuadLightModel(
                        corner=corner,
                        edge_u=tuple(float(c) for c in eu),
                        edge_v=tuple(float(c) for c in ev),
                        emission=emission,
                    )
                ],
                camera=CAMERA,
            )
        )
        x = np.array([rng.uniform(-0.8, 0.8), 0.0, rng.uniform(-0.8, 0.8)])
        wo = _upper_hemisphere(rng, 1)[0]
        u = tuple(float(c) for c in rng.random(2))
        sample = scene.sample_light_point(0, u)
        y = [corner[i] + u[0] * eu[i] + u[1] * ev[i] for i in range(3)]
        cross = np.cross(eu, ev)
        n_light = [float(c) for c in cross / math.sqrt(float(np.dot(cross, cross)))]
        exponent = max(2.0 / roughness**2 - 2.0, 0.0)

        f = scene.eval_F(ShadingQuery(x, wo, np.array([0.0, 1.0, 0.0]), 0), 0, sample)

        np.testing.assert_allclose(sample.point, y, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(sample.normal_at_light, n_light, atol=1e-12)
        expected = _glossy_integrand(x, [0.0, 1.0, 0.0], wo, y, n_light, emission, albedo, exponent)
        np.testing.assert_allclose(f.as_array(), expected, rtol=1e-9, atol=1e-12)
        lit += expected[0] > 0.0

    assert lit >= 5


def test_ray_hits_the_near_side_of_a_unit_sphere():
    scene = build_scene(
        SceneDocument(
            materials=[MaterialModel(name="ball")],
            meshes=[SphereModel(material="ball", center=(0.0, 0.0, 0.0), radius=1.0)],
            lights=[PointLightModel(position=(0.0, 3.0, 0.0), intensity=(1.0, 1.0, 1.0))],
            camera=CAMERA,
        )
    )
    origin = np.array([0.0, 0.0, -3.0])

    hit = scene.intersect(origin, np.array([0.0, 0.0, 1.0]))

    assert hit is not None and not hit.is_emitter
    assert hit.t == pytest.approx(2.0)
    np.testing.assert_allclose(hit.position, [0.0, 0.0, -1.0], atol=1e-12)
    np.testing.assert_allclose(hit.normal, [0.0, 0.0, -1.0], atol=1e-12)
    assert scene.intersect(origin, np.array([0.0, 0.0, -1.0])) is None
