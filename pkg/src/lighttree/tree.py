"""Binary light hierarchy built top-down with the surface-area-orientation heuristic.

Nodes are stored flat in pre-order (root is node 0); each carries the AABB of its
lights, their summed power Φ and an orientation cone. The tree is immutable after
`build_tree` and all queries on it are pure.
"""

import math
import time
from dataclasses import dataclass

import numpy as np

from lighttree.cone import OrientationCone
from scene.lights import LightKind, LightTable
from utils.logging import get_logger

logger = get_logger(__name__)

SAOH_BUCKETS = 12


@dataclass(frozen=True)
class LightTreeNode:
    """Read-only view of one node, for inspection and dumps."""

    index: int
    bounds_min: np.ndarray
    bounds_max: np.ndarray
    power: float
    cone: OrientationCone
    two_sided: bool
    children: tuple[int, int] | None
    light_index: int | None
    depth: int

    @property
    def is_leaf(self) -> bool:
        return self.children is None


@dataclass(frozen=True)
class LightTree:
    bounds_min: np.ndarray  # (N, 3)
    bounds_max: np.ndarray  # (N, 3)
    power: np.ndarray  # (N,)
    axis: np.ndarray  # (N, 3)
    theta_o: np.ndarray  # (N,)
    theta_e: np.ndarray  # (N,)
    two_sided: np.ndarray  # (N,) bool
    left: np.ndarray  # (N,) -1 for leaves
    right: np.ndarray
    parent: np.ndarray  # (N,) -1 for the root
    depth: np.ndarray  # (N,)
    light: np.ndarray  # (N,) light index at leaves, -1 otherwise
    leaf_of_light: np.ndarray  # (M,) node index of each light's leaf

    @property
    def node_count(self) -> int:
        return len(self.power)

    @property
    def light_count(self) -> int:
        return len(self.leaf_of_light)

    @property
    def height(self) -> int:
        return int(self.depth.max())

    def is_leaf(self, nodes: np.ndarray) -> np.ndarray:
        return self.left[nodes] < 0

    def node(self, index: int) -> LightTreeNode:
        leaf = self.left[index] < 0
        return LightTreeNode(
            index=index,
            bounds_min=self.bounds_min[index],
            bounds_max=self.bounds_max[index],
            power=float(self.power[index]),
            cone=OrientationCone(
                tuple(float(x) for x in self.axis[index]),
                float(self.theta_o[index]),
                float(self.theta_e[index]),
            ),
            two_sided=bool(self.two_sided[index]),
            children=None if leaf else (int(self.left[index]), int(self.right[index])),
            light_index=int(self.light[index]) if leaf else None,
            depth=int(self.depth[index]),
        )

    def leaves_under(self, node: int) -> np.ndarray:
        """Light indices of every leaf in the subtree rooted at ``node``."""
        out: list[int] = []
        stack = [node]
        while stack:
            n = stack.pop()
            if self.left[n] < 0:
                out.append(int(self.light[n]))
            else:
                stack.extend((int(self.right[n]), int(self.left[n])))
        return np.asarray(out, dtype=np.int64)


@dataclass
class _Aggregate:
    bounds_min: np.ndarray
    bounds_max: np.ndarray
    power: float
    cone: OrientationCone | None
    two_sided: bool

    @classmethod
    def empty(cls) -> "_Aggregate":
        return cls(np.full(3, np.inf), np.full(3, -np.inf), 0.0, None, False)

    def add(self, other: "_Aggregate") -> "_Aggregate":
        if other.cone is None:
            return self
        if self.cone is None:
            return other
        return _Aggregate(
            np.minimum(self.bounds_min, other.bounds_min),
            np.maximum(self.bounds_max, other.bounds_max),
            self.power + other.power,
            self.cone.union(other.cone),
            self.two_sided or other.two_sided,
        )

    def saoh(self) -> float:
        if self.cone is None:
            return 0.0
        extent = self.bounds_max - self.bounds_min
        area = 2.0 * (extent[0] * extent[1] + extent[1] * extent[2] + extent[2] * extent[0])
        # a point-sized group still has a cost proportional to its power
        area = max(float(area), 1e-12)
        return self.power * area * self.cone.measure()


def _leaf_aggregates(lights: LightTable) -> list[_Aggregate]:
    lo, hi = lights.bounds()
    out = []
    for i in range(len(lights)):
        kind = LightKind(int(lights.kind[i]))
        normal = tuple(float(x) for x in lights.normal[i])
        if kind == LightKind.POINT or lights.two_sided[i]:
            # emits into every direction: normals cover the whole sphere
            cone = OrientationCone(normal, math.pi, math.pi / 2)
        else:
            cone = OrientationCone(normal, 0.0, math.pi / 2)
        out.append(
            _Aggregate(lo[i], hi[i], float(lights.power[i]), cone, bool(lights.two_sided[i]))
        )
    return out


def build_tree(lights: LightTable) -> LightTree:
    """
    Build the light hierarchy.

    Each split sweeps ``SAOH_BUCKETS`` centroid buckets along every axis and keeps
    the boundary with the lowest surface-area × power × orientation cost, scaled by
    the axis aspect ratio. Groups whose centroids coincide are split at the median
    of the input order. Deterministic for a fixed light order.

    Arguments:
        lights (LightTable): At least one emitter.

    Returns:
        LightTree: Pre-order flat tree whose leaves hold exactly one light each.
    """
    m = len(lights)
    if m < 1:
        raise ValueError("build_tree needs at least one light")
    start = time.perf_counter()
    leaves = _leaf_aggregates(lights)
    centroids = lights.centroids()

    records: list[dict] = []

    def emit(indices: np.ndarray, parent: int, depth: int) -> tuple[int, _Aggregate]:
        node = len(records)
        records.append({"parent": parent, "depth": depth, "left": -1, "right": -1, "light": -1})
        if len(indices) == 1:
            agg = leaves[int(indices[0])]
            records[node].update(light=int(indices[0]), agg=agg)
            return node, agg

        left_idx, right_idx = _split(indices, centroids, leaves)
        left, left_agg = emit(left_idx, node, depth + 1)
        right, right_agg = emit(right_idx, node, depth + 1)
        agg = left_agg.add(right_agg)
        records[node].update(left=left, right=right, agg=agg)
        return node, agg

    emit(np.arange(m), -1, 0)

    n = len(records)
    tree = LightTree(
        bounds_min=np.array([r["agg"].bounds_min for r in records]).reshape(n, 3),
        bounds_max=np.array([r["agg"].bounds_max for r in records]).reshape(n, 3),
        power=np.array([r["agg"].power for r in records], dtype=np.float64),
        axis=np.array([r["agg"].cone.axis for r in records], dtype=np.float64).reshape(n, 3),
        theta_o=np.array([r["agg"].cone.theta_o for r in records], dtype=np.float64),
        theta_e=np.array([r["agg"].cone.theta_e for r in records], dtype=np.float64),
        two_sided=np.array([r["agg"].two_sided for r in records], dtype=bool),
        left=np.array([r["left"] for r in records], dtype=np.int64),
        right=np.array([r["right"] for r in records], dtype=np.int64),
        parent=np.array([r["parent"] for r in records], dtype=np.int64),
        depth=np.array([r["depth"] for r in records], dtype=np.int64),
        light=np.array([r["light"] for r in records], dtype=np.int64),
        leaf_of_light=np.zeros(m, dtype=np.int64),
    )
    leaf_nodes = np.flatnonzero(tree.light >= 0)
    tree.leaf_of_light[tree.light[leaf_nodes]] = leaf_nodes
    logger.info(
        "Light tree built: %d lights, %d nodes, height %d in %.3fs.",
        m,
        n,
        tree.height,
        time.perf_counter() - start,
    )
    return tree


def _split(
    indices: np.ndarray, centroids: np.ndarray, leaves: list[_Aggregate]
) -> tuple[np.ndarray, np.ndarray]:
    c = centroids[indices]
    c_min = c.min(axis=0)
    c_max = c.max(axis=0)
    extent = c_max - c_min
    parent = _Aggregate.empty()
    for i in indices:
        parent = parent.add(leaves[int(i)])
    parent_cost = max(parent.saoh(), 1e-300)
    b_extent = parent.bounds_max - parent.bounds_min
    max_extent = float(b_extent.max())

    best: tuple[float, int, int] | None = None  # (cost, axis, boundary)
    best_buckets: np.ndarray | None = None
    for axis in range(3):
        if extent[axis] <= 0.0:
            continue
        rel = (c[:, axis] - c_min[axis]) / extent[axis]
        buckets = np.minimum((rel * SAOH_BUCKETS).astype(np.int64), SAOH_BUCKETS - 1)
        aggregates = [_Aggregate.empty() for _ in range(SAOH_BUCKETS)]
        for light, b in zip(indices, buckets, strict=True):
            aggregates[b] = aggregates[b].add(leaves[int(light)])
        # prefix/suffix sweeps
        below = [_Aggregate.empty()]
        for b in range(SAOH_BUCKETS - 1):
            below.append(below[-1].add(aggregates[b]))
        above = [_Aggregate.empty()]
        for b in range(SAOH_BUCKETS - 1, 0, -1):
            above.append(above[-1].add(aggregates[b]))
        above.reverse()  # above[k] aggregates buckets k+1..end
        kr = max_extent / max(float(b_extent[axis]), 1e-12)
        for boundary in range(1, SAOH_BUCKETS):
            lo_agg = below[boundary]
            hi_agg = above[boundary - 1]
            if lo_agg.cone is None or hi_agg.cone is None:
                continue
            cost = kr * (lo_agg.saoh() + hi_agg.saoh()) / parent_cost
            if best is None or cost < best[0]:
                best = (cost, axis, boundary)
                best_buckets = buckets
    if best is None:
        mid = len(indices) // 2
        return indices[:mid], indices[mid:]
    _, _, boundary = best
    go_left = best_buckets < boundary
    return indices[go_left], indices[~go_left]
