"""Vectorised ray/primitive kernels shared by the BVH and its brute-force oracle.

All functions broadcast over leading dimensions so a set of rays can be tested
against a set of primitives with shapes like ``(n_rays, 1, 3)`` vs ``(1, n_prims, 3)``.
Misses are reported as ``np.inf``.
"""

import numpy as np

_DET_EPSILON = 1e-14
_DIR_EPSILON = 1e-12


def dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sum(a * b, axis=-1)


def normalize(v: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / np.where(norm > 0.0, norm, 1.0)


def safe_inverse(dirs: np.ndarray) -> np.ndarray:
    """Component-wise 1/d with zero components nudged so slab tests never produce NaN."""
    nudged = np.where(np.abs(dirs) < _DIR_EPSILON, np.copysign(_DIR_EPSILON, dirs), dirs)
    return 1.0 / nudged


def ray_triangle(
    origins: np.ndarray,
    dirs: np.ndarray,
    v0: np.ndarray,
    e1: np.ndarray,
    e2: np.ndarray,
    t_min: np.ndarray | float,
    t_max: np.ndarray | float,
) -> np.ndarray:
    """Möller–Trumbore intersection distance, ``inf`` where there is no hit in (t_min, t_max)."""
    pvec = np.cross(dirs, e2)
    det = dot(e1, pvec)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_det = 1.0 / det
        tvec = origins - v0
        u = dot(tvec, pvec) * inv_det
        qvec = np.cross(tvec, e1)
        v = dot(dirs, qvec) * inv_det
        t = dot(e2, qvec) * inv_det
    hit = (
        (np.abs(det) > _DET_EPSILON)
        & (u >= 0.0)
        & (v >= 0.0)
        & (u + v <= 1.0)
        & (t > t_min)
        & (t < t_max)
    )
    return np.where(hit, t, np.inf)


def ray_sphere(
    origins: np.ndarray,
    dirs: np.ndarray,
    centers: np.ndarray,
    radii: np.ndarray,
    t_min: np.ndarray | float,
    t_max: np.ndarray | float,
) -> np.ndarray:
    """Nearest sphere hit distance for unit-length directions, ``inf`` on a miss."""
    oc = origins - centers
    half_b = dot(oc, dirs)
    c = dot(oc, oc) - radii * radii
    disc = half_b * half_b - c
    with np.errstate(invalid="ignore"):
        root = np.sqrt(disc)
    near = -half_b - root
    far = -half_b + root
    near_ok = (disc >= 0.0) & (near > t_min) & (near < t_max)
    far_ok = (disc >= 0.0) & (far > t_min) & (far < t_max)
    return np.where(near_ok, near, np.where(far_ok, far, np.inf))


def ray_aabb(
    origins: np.ndarray,
    inv_dirs: np.ndarray,
    box_min: np.ndarray,
    box_max: np.ndarray,
    t_min: np.ndarray,
    t_max: np.ndarray,
) -> np.ndarray:
    """Slab test; True where the ray overlaps the box inside [t_min, t_max]."""
    t0 = (box_min - origins) * inv_dirs
    t1 = (box_max - origins) * inv_dirs
    t_near = np.max(np.minimum(t0, t1), axis=-1)
    t_far = np.min(np.maximum(t0, t1), axis=-1)
    return np.maximum(t_near, t_min) <= np.minimum(t_far, t_max)


def reflect(wo: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Mirror ``wo`` (pointing away from the surface) about ``n``."""
    return 2.0 * dot(wo, n)[..., None] * n - wo
