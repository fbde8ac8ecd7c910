"""Camera paths to the first non-specular vertex and the one-light direct estimator."""

from dataclasses import dataclass

import numpy as np

from integrator.selection import LightSelector
from neural.training import TrainingBatch
from scene.geometry import dot, reflect
from scene.query import ShadingBatch, ShadingQuery
from scene.scene import Scene
from scene.spectrum import Spectrum, luminance

MAX_SPECULAR_DEPTH = 5
# uniforms drawn per pixel and wave: jitter (2), selection (2), point on light (2)
UNIFORMS_PER_SAMPLE = 6


@dataclass(frozen=True)
class PrimaryBatch:
    """Result of tracing camera rays through mirror chains.

    ``queries[i]`` belongs to ray ``pixel_index[i]`` and is weighted by
    ``throughput[i]``; ``emitted`` holds radiance picked up from emitters that
    the chains hit directly, one row per input ray.
    """

    queries: ShadingBatch
    pixel_index: np.ndarray
    throughput: np.ndarray
    emitted: np.ndarray


def trace_primary_batch(scene: Scene, origins: np.ndarray, dirs: np.ndarray) -> PrimaryBatch:
    """
    Follow camera rays until the first non-specular hit.

    Mirrors reflect the ray and scale the throughput by their albedo, up to
    ``MAX_SPECULAR_DEPTH`` bounces; chains still on a mirror after that are
    dropped. Emitter hits add emission times throughput and end the chain.
    Shading normals are flipped to face the outgoing direction.
    """
    n = len(origins)
    emitted = np.zeros((n, 3))
    throughput = np.ones((n, 3))
    alive = np.arange(n)
    o = np.asarray(origins, dtype=np.float64)
    d = np.asarray(dirs, dtype=np.float64)
    found: list[tuple[np.ndarray, ShadingBatch, np.ndarray]] = []

    for _ in range(MAX_SPECULAR_DEPTH + 1):
        if not len(alive):
            break
        hits = scene.intersect_batch(o, d)
        keep = hits.hit
        alive, o, d = alive[keep], o[keep], d[keep]
        positions = hits.positions[keep]
        normals = hits.normals[keep]
        bsdf_ids = hits.bsdf_ids[keep]
        light_index = hits.light_index[keep]
        wo = -d

        emitter = light_index >= 0
        if emitter.any():
            radiance = scene.emitted_towards(light_index[emitter], wo[emitter])
            emitted[alive[emitter]] += throughput[alive[emitter]] * radiance

        facing = np.where((dot(normals, wo) < 0.0)[:, None], -normals, normals)
        mirror = ~emitter & scene.materials.is_specular(bsdf_ids)
        diffuse = ~emitter & ~mirror
        if diffuse.any():
            found.append(
                (
                    alive[diffuse],
                    ShadingBatch(
                        positions=positions[diffuse],
                        out_dirs=wo[diffuse],
                        normals=facing[diffuse],
                        bsdf_ids=bsdf_ids[diffuse],
                    ),
                    throughput[alive[diffuse]].copy(),
                )
            )
        alive = alive[mirror]
        throughput[alive] *= scene.materials.albedo[bsdf_ids[mirror]]
        d = reflect(wo[mirror], facing[mirror])
        o = positions[mirror]

    if found:
        pixel_index = np.concatenate([f[0] for f in found])
        queries = ShadingBatch.concatenate([f[1] for f in found])
        weights = np.concatenate([f[2] for f in found])
        order = np.argsort(pixel_index, kind="stable")
        queries = queries.subset(order)
        pixel_index, weights = pixel_index[order], weights[order]
    else:
        pixel_index = np.zeros(0, dtype=np.int64)
        queries = ShadingBatch(np.zeros((0, 3)), np.zeros((0, 3)), np.zeros((0, 3)), np.zeros(0, dtype=np.int64))
        weights = np.zeros((0, 3))
    return PrimaryBatch(queries=queries, pixel_index=pixel_index, throughput=weights, emitted=emitted)


def trace_primary(
    scene: Scene, pixel: tuple[int, int], rng: np.random.Generator, width: int, height: int
) -> tuple[ShadingQuery | None, Spectrum]:
    """
    Trace one jittered camera ray through pixel ``(px, py)``.

    Returns:
        tuple[ShadingQuery | None, Spectrum]: The first non-specular hit (None on a
        miss, an emitter hit or an over-long mirror chain) and its chain throughput.
    """
    origins, dirs = scene.camera.generate_rays(
        np.array([pixel[0]], dtype=np.float64),
        np.array([pixel[1]], dtype=np.float64),
        rng.random((1, 2)),
        width,
        height,
    )
    primary = trace_primary_batch(scene, origins, dirs)
    if not len(primary.queries):
        return None, Spectrum(0.0, 0.0, 0.0)
    return primary.queries[0], Spectrum.from_array(primary.throughput[0])


def estimate_direct_batch(
    scene: Scene,
    queries: ShadingBatch,
    selector: LightSelector,
    u: np.ndarray,
    collect_records: bool = False,
) -> tuple[np.ndarray, TrainingBatch | None]:
    """
    One-light next-event estimate F(x, l, ω_o) / (p(l|y) · p(y)) per shading point.

    Arguments:
        scene (Scene): The scene.
        queries (ShadingBatch): N shading points.
        selector (LightSelector): Light-selection strategy.
        u (np.ndarray): (N, 4) uniforms; columns 0-1 drive selection, 2-3 the point on the light.
        collect_records (bool, optional): Return training records (cluster-based selectors only).

    Returns:
        tuple[np.ndarray, TrainingBatch | None]: (N, 3) radiance estimates and the records.
    """
    if not len(queries):
        return np.zeros((0, 3)), None
    selection = selector.select(queries, u[:, :2])
    samples = scene.sample_light_points(selection.light, u[:, 2:4])
    f = scene.eval_F_batch(queries, selection.light, samples)
    estimate = f / (samples.pdf_area * selection.pmf)[:, None]

    records = None
    if collect_records and selection.cluster is not None:
        records = TrainingBatch(
            queries=queries,
            cluster=selection.cluster,
            light=selection.light,
            f_estimate=luminance(f),
            pdf_area=samples.pdf_area,
            pmf_in_cluster=selection.pmf_in_cluster,
            pmf_cluster=selection.pmf_cluster,
            log_baseline=selection.log_baseline,
        )
    return estimate, records


def estimate_direct(
    scene: Scene,
    q: ShadingQuery,
    selector: LightSelector,
    rng: np.random.Generator,
    collect_record: bool = False,
) -> tuple[Spectrum, TrainingBatch | None]:
    """Single-query form of `estimate_direct_batch`, drawing its four uniforms from ``rng``."""
    estimate, records = estimate_direct_batch(
        scene, ShadingBatch.from_queries([q]), selector, rng.random((1, 4)), collect_record
    )
    return Spectrum.from_array(estimate[0]), records
