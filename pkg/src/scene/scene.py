"""The immutable scene: geometry, materials, emitters and camera.

Everything the integrand F needs is here: closest-hit and shadow-ray queries,
BSDF evaluation and uniform point sampling on emitters. The scene is never
mutated after construction, so rendering threads share one instance freely.
"""

import hashlib
from dataclasses import dataclass

import numpy as np

from scene.bsdf import Bsdf, MaterialTable
from scene.bvh import TriangleBvh, brute_force_intersect
from scene.camera import Camera
from scene.geometry import dot, normalize, ray_sphere
from scene.lights import Light, LightKind, LightSampleBatch, LightSamplePoint, LightTable
from scene.query import ShadingBatch, ShadingQuery
from scene.spectrum import Spectrum

# shadow-ray offset as a fraction of the scene diagonal
RAY_EPSILON_SCALE = 1e-4


@dataclass(frozen=True)
class Hit:
    position: np.ndarray
    normal: np.ndarray
    bsdf_id: int
    is_emitter: bool
    light_index: int
    t: float


@dataclass(frozen=True)
class HitBatch:
    hit: np.ndarray  # (N,) bool
    t: np.ndarray
    positions: np.ndarray
    normals: np.ndarray  # geometric normals, not yet oriented
    bsdf_ids: np.ndarray
    light_index: np.ndarray  # emitter light index or -1

    def __getitem__(self, i: int) -> Hit | None:
        if not self.hit[i]:
            return None
        return Hit(
            position=self.positions[i],
            normal=self.normals[i],
            bsdf_id=int(self.bsdf_ids[i]),
            is_emitter=bool(self.light_index[i] >= 0),
            light_index=int(self.light_index[i]),
            t=float(self.t[i]),
        )


class Scene:
    """Triangles (including emitter triangles), analytic spheres, lights and a camera.

    Arguments:
        bsdfs (list[Bsdf]): Materials indexed by bsdf id.
        triangles (np.ndarray): (T, 3, 3) vertex positions.
        triangle_bsdf (np.ndarray): (T,) bsdf id per triangle.
        triangle_light (np.ndarray): (T,) light index for emitter triangles, -1 otherwise.
        spheres (np.ndarray): (P, 4) centre and radius.
        sphere_bsdf (np.ndarray): (P,) bsdf id per sphere.
        lights (list[Light]): Emitters; list order defines light indices.
        camera (Camera): Viewpoint for `trace_primary`.
        material_names (list[str], optional): Names matching ``bsdfs`` for diagnostics.
    """

    def __init__(
        self,
        bsdfs: list[Bsdf],
        triangles: np.ndarray,
        triangle_bsdf: np.ndarray,
        triangle_light: np.ndarray,
        spheres: np.ndarray,
        sphere_bsdf: np.ndarray,
        lights: list[Light],
        camera: Camera,
        material_names: list[str] | None = None,
    ):
        self.bsdfs = list(bsdfs)
        self.material_names = material_names or [f"material_{i}" for i in range(len(bsdfs))]
        self.materials = MaterialTable.from_bsdfs(self.bsdfs)
        triangles = np.asarray(triangles, dtype=np.float64).reshape(-1, 3, 3)
        self.v0 = triangles[:, 0]
        self.e1 = triangles[:, 1] - triangles[:, 0]
        self.e2 = triangles[:, 2] - triangles[:, 0]
        self.triangle_normals = normalize(np.cross(self.e1, self.e2))
        self.triangle_bsdf = np.asarray(triangle_bsdf, dtype=np.int64)
        self.triangle_light = np.asarray(triangle_light, dtype=np.int64)
        self.spheres = np.asarray(spheres, dtype=np.float64).reshape(-1, 4)
        self.sphere_bsdf = np.asarray(sphere_bsdf, dtype=np.int64)
        self.lights = list(lights)
        self.light_table = LightTable.from_lights(self.lights)
        self.camera = camera
        self.bvh = TriangleBvh.build(self.v0, self.e1, self.e2)

        points = [triangles.reshape(-1, 3)]
        if len(self.spheres):
            r = self.spheres[:, 3:4]
            points += [self.spheres[:, :3] - r, self.spheres[:, :3] + r]
        if self.lights:
            points += list(self.light_table.bounds())
        cloud = np.concatenate([p for p in points if len(p)]).reshape(-1, 3)
        self.bounds_min = cloud.min(axis=0)
        self.bounds_max = cloud.max(axis=0)
        self.diagonal = float(np.linalg.norm(self.bounds_max - self.bounds_min))
        self.ray_epsilon = RAY_EPSILON_SCALE * self.diagonal

    @property
    def light_count(self) -> int:
        return len(self.lights)

    @property
    def content_hash(self) -> str:
        """Stable digest of everything that influences a render."""
        digest = hashlib.sha256()
        for array in (
            self.v0,
            self.e1,
            self.e2,
            self.triangle_bsdf,
            self.triangle_light,
            self.spheres,
            self.sphere_bsdf,
            self.materials.kind,
            self.materials.albedo,
            self.materials.exponent,
            self.light_table.kind,
            self.light_table.origin,
            self.light_table.edge_u,
            self.light_table.edge_v,
            self.light_table.emission,
            self.light_table.two_sided,
            self.camera.position,
            self.camera.look_at,
            self.camera.up,
            np.array([self.camera.fov_deg]),
        ):
            digest.update(np.ascontiguousarray(array).tobytes())
        return digest.hexdigest()

    # ------------------------------------------------------------------ rays

    def _closest(
        self, origins: np.ndarray, dirs: np.ndarray, t_max: np.ndarray, brute_force: bool
    ) -> HitBatch:
        n = len(origins)
        t_min = np.full(n, self.ray_epsilon)
        if brute_force:
            tri_t, tri = brute_force_intersect(
                origins, dirs, self.v0, self.e1, self.e2, t_min, t_max
            )
        else:
            tri_t, tri = self.bvh.intersect(origins, dirs, t_min, t_max)

        sph_t = np.full(n, np.inf)
        sph = np.full(n, -1, dtype=np.int64)
        if len(self.spheres):
            t = ray_sphere(
                origins[:, None],
                dirs[:, None],
                self.spheres[None, :, :3],
                self.spheres[None, :, 3],
                t_min[:, None],
                t_max[:, None],
            )
            sph = np.argmin(t, axis=1)
            sph_t = t[np.arange(n), sph]

        use_sphere = sph_t < tri_t
        t = np.where(use_sphere, sph_t, tri_t)
        hit = np.isfinite(t)
        positions = origins + np.where(hit, t, 0.0)[:, None] * dirs

        normals = np.zeros((n, 3))
        bsdf_ids = np.zeros(n, dtype=np.int64)
        light_index = np.full(n, -1, dtype=np.int64)
        tri_hit = hit & ~use_sphere
        normals[tri_hit] = self.triangle_normals[tri[tri_hit]]
        bsdf_ids[tri_hit] = self.triangle_bsdf[tri[tri_hit]]
        light_index[tri_hit] = self.triangle_light[tri[tri_hit]]
        sph_hit = hit & use_sphere
        if sph_hit.any():
            centers = self.spheres[sph[sph_hit], :3]
            normals[sph_hit] = normalize(positions[sph_hit] - centers)
            bsdf_ids[sph_hit] = self.sphere_bsdf[sph[sph_hit]]
        return HitBatch(
            hit=hit,
            t=t,
            positions=positions,
            normals=normals,
            bsdf_ids=bsdf_ids,
            light_index=light_index,
        )

    def intersect_batch(
        self,
        origins: np.ndarray,
        dirs: np.ndarray,
        t_max: np.ndarray | float = np.inf,
        brute_force: bool = False,
    ) -> HitBatch:
        """Nearest hit per ray with t in (ε_ray, t_max); ``brute_force`` skips the BVH."""
        origins = np.asarray(origins, dtype=np.float64).reshape(-1, 3)
        dirs = np.asarray(dirs, dtype=np.float64).reshape(-1, 3)
        t_max = np.broadcast_to(np.asarray(t_max, dtype=np.float64), (len(origins),))
        return self._closest(origins, dirs, t_max.copy(), brute_force)

    def intersect(
        self, origin: np.ndarray, direction: np.ndarray, t_max: float = np.inf
    ) -> Hit | None:
        """Nearest intersection of one ray, or None on a miss."""
        return self.intersect_batch(origin, direction, t_max)[0]

    def occluded_batch(
        self, origins: np.ndarray, dirs: np.ndarray, t_min: np.ndarray, t_max: np.ndarray
    ) -> np.ndarray:
        blocked = self.bvh.occluded(origins, dirs, t_min, t_max)
        if len(self.spheres):
            t = ray_sphere(
                origins[:, None],
                dirs[:, None],
                self.spheres[None, :, :3],
                self.spheres[None, :, 3],
                t_min[:, None],
                t_max[:, None],
            )
            blocked |= np.isfinite(t).any(axis=1)
        return blocked

    def visible_batch(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """True where the open segment (a + ε·dir, b − ε·dir) is unobstructed."""
        a = np.asarray(a, dtype=np.float64).reshape(-1, 3)
        b = np.asarray(b, dtype=np.float64).reshape(-1, 3)
        d = b - a
        dist = np.linalg.norm(d, axis=-1)
        dirs = d / np.where(dist > 0.0, dist, 1.0)[:, None]
        t_min = np.full(len(a), self.ray_epsilon)
        t_max = dist - self.ray_epsilon
        live = t_max > t_min
        visible = np.ones(len(a), dtype=bool)
        if live.any():
            visible[live] = ~self.occluded_batch(a[live], dirs[live], t_min[live], t_max[live])
        return visible

    def visible(self, a: np.ndarray, b: np.ndarray) -> bool:
        return bool(self.visible_batch(a, b)[0])

    # ------------------------------------------------------------- emitters

    def sample_light_points(self, lights: np.ndarray, u: np.ndarray) -> LightSampleBatch:
        return self.light_table.sample_points(np.asarray(lights, dtype=np.int64), u)

    def sample_light_point(self, y: int, u: tuple[float, float]) -> LightSamplePoint:
        """Uniform point on light ``y``; point lights use the delta convention pdf_area = 1."""
        return self.sample_light_points(np.array([y]), np.asarray(u, dtype=np.float64)[None])[0]

    def emitted_towards(self, light_index: np.ndarray, directions: np.ndarray) -> np.ndarray:
        """Radiance leaving emitter surfaces along ``directions`` (pointing away from the light)."""
        table = self.light_table
        cos_l = dot(table.normal[light_index], directions)
        facing = (cos_l > 0.0) | table.two_sided[light_index]
        return np.where(facing[:, None], table.emission[light_index], 0.0)

    # ------------------------------------------------------------ integrand

    def eval_F_batch(
        self,
        queries: ShadingBatch,
        lights: np.ndarray,
        samples: LightSampleBatch,
        test_visibility: bool = True,
    ) -> np.ndarray:
        """F = L_i · f_s · G per query, (N, 3).

        G is |cosθ_x|·|cosθ_l| / ‖x − l‖² times binary visibility for area lights and
        |cosθ_x| / ‖x − l‖² for point lights. Back-facing configurations yield zero.
        """
        table = self.light_table
        lights = np.asarray(lights, dtype=np.int64)
        d = samples.points - queries.positions
        dist2 = dot(d, d)
        dist = np.sqrt(dist2)
        wi = d / np.where(dist > 0.0, dist, 1.0)[:, None]

        cos_x = dot(queries.normals, wi)
        is_point = table.kind[lights] == LightKind.POINT
        cos_l_signed = -dot(samples.normals, wi)
        cos_l = np.where(table.two_sided[lights], np.abs(cos_l_signed), cos_l_signed)
        cos_l = np.where(is_point, 1.0, cos_l)
        valid = (cos_x > 0.0) & (cos_l > 0.0) & (dist2 > 0.0)

        f = self.materials.evaluate(queries.bsdf_ids, queries.out_dirs, wi, queries.normals)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(valid, cos_x * cos_l / dist2, 0.0)
        contribution = table.emission[lights] * f * g[:, None]

        if test_visibility:
            check = np.any(contribution > 0.0, axis=1)
            if check.any():
                vis = self.visible_batch(queries.positions[check], samples.points[check])
                idx = np.flatnonzero(check)
                contribution[idx[~vis]] = 0.0
        return contribution

    def eval_F(self, q: ShadingQuery, y: int, sample: LightSamplePoint) -> Spectrum:
        batch = ShadingBatch.from_queries([q])
        samples = LightSampleBatch(
            points=np.asarray(sample.point, dtype=np.float64)[None],
            pdf_area=np.array([sample.pdf_area]),
            normals=np.asarray(sample.normal_at_light, dtype=np.float64)[None],
        )
        return Spectrum.from_array(self.eval_F_batch(batch, np.array([y]), samples)[0])
