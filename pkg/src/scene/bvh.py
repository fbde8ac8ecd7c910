"""Binary AABB hierarchy over triangles with packet-style vectorised traversal.

Nodes are stored flat in pre-order. A traversal carries the indices of the rays
still alive at a node, so each numpy call handles every ray that reached it.
"""

from dataclasses import dataclass

import numpy as np

from scene.geometry import ray_aabb, ray_triangle, safe_inverse

_LEAF_SIZE = 4


@dataclass(frozen=True)
class TriangleBvh:
    node_min: np.ndarray  # (nodes, 3)
    node_max: np.ndarray  # (nodes, 3)
    left: np.ndarray  # (nodes,) -1 for leaves
    right: np.ndarray
    first: np.ndarray  # first triangle slot of a leaf
    count: np.ndarray  # triangle count of a leaf, 0 for interior nodes
    order: np.ndarray  # slot -> original triangle index
    v0: np.ndarray  # triangle data permuted into slot order
    e1: np.ndarray
    e2: np.ndarray

    @property
    def node_count(self) -> int:
        return len(self.left)

    @classmethod
    def build(cls, v0: np.ndarray, e1: np.ndarray, e2: np.ndarray) -> "TriangleBvh":
        """Median split on the longest centroid axis; deterministic for a fixed triangle order."""
        v1 = v0 + e1
        v2 = v0 + e2
        tri_min = np.minimum(np.minimum(v0, v1), v2)
        tri_max = np.maximum(np.maximum(v0, v1), v2)
        centroids = (tri_min + tri_max) * 0.5

        node_min: list[np.ndarray] = []
        node_max: list[np.ndarray] = []
        left: list[int] = []
        right: list[int] = []
        first: list[int] = []
        count: list[int] = []
        order: list[int] = []

        def emit(indices: np.ndarray) -> int:
            node = len(left)
            node_min.append(tri_min[indices].min(axis=0))
            node_max.append(tri_max[indices].max(axis=0))
            left.append(-1)
            right.append(-1)
            first.append(0)
            count.append(0)
            if len(indices) <= _LEAF_SIZE:
                first[node] = len(order)
                count[node] = len(indices)
                order.extend(int(i) for i in indices)
                return node
            c = centroids[indices]
            axis = int(np.argmax(c.max(axis=0) - c.min(axis=0)))
            # stable sort keeps the build deterministic when centroids tie
            sorted_indices = indices[np.argsort(c[:, axis], kind="stable")]
            mid = len(sorted_indices) // 2
            left[node] = emit(sorted_indices[:mid])
            right[node] = emit(sorted_indices[mid:])
            return node

        if len(v0) == 0:
            empty = np.zeros((0, 3))
            return cls(
                node_min=empty,
                node_max=empty,
                left=np.zeros(0, dtype=np.int64),
                right=np.zeros(0, dtype=np.int64),
                first=np.zeros(0, dtype=np.int64),
                count=np.zeros(0, dtype=np.int64),
                order=np.zeros(0, dtype=np.int64),
                v0=empty,
                e1=empty,
                e2=empty,
            )

        emit(np.arange(len(v0)))
        order_arr = np.asarray(order, dtype=np.int64)
        return cls(
            node_min=np.asarray(node_min),
            node_max=np.asarray(node_max),
            left=np.asarray(left, dtype=np.int64),
            right=np.asarray(right, dtype=np.int64),
            first=np.asarray(first, dtype=np.int64),
            count=np.asarray(count, dtype=np.int64),
            order=order_arr,
            v0=v0[order_arr],
            e1=e1[order_arr],
            e2=e2[order_arr],
        )

    def intersect(
        self,
        origins: np.ndarray,
        dirs: np.ndarray,
        t_min: np.ndarray,
        t_max: np.ndarray,
    ) -> tuple[np.ndarray, np.ndarray]:
        """Closest hit per ray. Returns (t, original triangle index or -1)."""
        n = len(origins)
        best_t = np.full(n, np.inf)
        best_tri = np.full(n, -1, dtype=np.int64)
        if self.node_count == 0 or n == 0:
            return best_t, best_tri
        limit = t_max.astype(np.float64, copy=True)
        inv_dirs = safe_inverse(dirs)
        stack: list[tuple[int, np.ndarray]] = [(0, np.arange(n))]
        while stack:
            node, rays = stack.pop()
            inside = ray_aabb(
                origins[rays],
                inv_dirs[rays],
                self.node_min[node],
                self.node_max[node],
                t_min[rays],
                limit[rays],
            )
            rays = rays[inside]
            if rays.size == 0:
                continue
            if self.count[node] > 0:
                s = slice(self.first[node], self.first[node] + self.count[node])
                t = ray_triangle(
                    origins[rays, None, :],
                    dirs[rays, None, :],
                    self.v0[None, s],
                    self.e1[None, s],
                    self.e2[None, s],
                    t_min[rays, None],
                    limit[rays, None],
                )
                j = np.argmin(t, axis=1)
                tj = t[np.arange(len(rays)), j]
                closer = tj < limit[rays]
                hit_rays = rays[closer]
                limit[hit_rays] = tj[closer]
                best_t[hit_rays] = tj[closer]
                best_tri[hit_rays] = self.order[self.first[node] + j[closer]]
                continue
            stack.append((int(self.right[node]), rays))
            stack.append((int(self.left[node]), rays))
        return best_t, best_tri

    def occluded(
        self,
        origins: np.ndarray,
        dirs: np.ndarray,
        t_min: np.ndarray,
        t_max: np.ndarray,
    ) -> np.ndarray:
        """Any-hit query; a ray leaves the traversal as soon as something blocks it."""
        n = len(origins)
        blocked = np.zeros(n, dtype=bool)
        if self.node_count == 0 or n == 0:
            return blocked
        inv_dirs = safe_inverse(dirs)
        stack: list[tuple[int, np.ndarray]] = [(0, np.arange(n))]
        while stack:
            node, rays = stack.pop()
            rays = rays[~blocked[rays]]
            if rays.size == 0:
                continue
            inside = ray_aabb(
                origins[rays],
                inv_dirs[rays],
                self.node_min[node],
                self.node_max[node],
                t_min[rays],
                t_max[rays],
            )
            rays = rays[inside]
            if rays.size == 0:
                continue
            if self.count[node] > 0:
                s = slice(self.first[node], self.first[node] + self.count[node])
                t = ray_triangle(
                    origins[rays, None, :],
                    dirs[rays, None, :],
                    self.v0[None, s],
                    self.e1[None, s],
                    self.e2[None, s],
                    t_min[rays, None],
                    t_max[rays, None],
                )
                blocked[rays[np.isfinite(t).any(axis=1)]] = True
                continue
            stack.append((int(self.right[node]), rays))
            stack.append((int(self.left[node]), rays))
        return blocked


def brute_force_intersect(
    origins: np.ndarray,
    dirs: np.ndarray,
    v0: np.ndarray,
    e1: np.ndarray,
    e2: np.ndarray,
    t_min: np.ndarray,
    t_max: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Every ray against every triangle; the oracle the BVH is checked against."""
    n = len(origins)
    if len(v0) == 0 or n == 0:
        return np.full(n, np.inf), np.full(n, -1, dtype=np.int64)
    t = ray_triangle(
        origins[:, None, :],
        dirs[:, None, :],
        v0[None],
        e1[None],
        e2[None],
        t_min[:, None],
        t_max[:, None],
    )
    j = np.argmin(t, axis=1)
    tj = t[np.arange(n), j]
    return tj, np.where(np.isfinite(tj), j, -1)
