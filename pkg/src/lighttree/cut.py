"""The fixed global cluster cut and its per-shading-point baseline weights."""

from dataclasses import dataclass

import numpy as np

from lighttree.importance import ImportanceMode, node_importance_batch
from lighttree.tree import LightTree
from scene.query import ShadingBatch, ShadingQuery
from utils.logging import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class ClusterCut:
    """S disjoint subtrees covering every light exactly once.

    ``nodes`` are in tree pre-order, so cluster indices follow the spatial order
    of the build. ``cluster_of_light[y]`` is the cluster holding light ``y``.
    """

    tree: LightTree
    nodes: np.ndarray  # (S,)
    level: int
    cluster_of_light: np.ndarray  # (M,)
    importance: ImportanceMode = ImportanceMode.GEO_COS

    @property
    def size(self) -> int:
        return len(self.nodes)

    def lights_in(self, c: int) -> np.ndarray:
        return self.tree.leaves_under(int(self.nodes[c]))


def select_cut(
    tree: LightTree, k: int, importance: ImportanceMode = ImportanceMode.GEO_COS
) -> ClusterCut:
    """
    Select every node at depth ``k`` plus every leaf shallower than ``k``.

    Arguments:
        tree (LightTree): The hierarchy.
        k (int): Cluster level, ``k >= 0``. Levels past the tree height yield one
            cluster per light.
        importance (ImportanceMode, optional): Importance rule used by every query on the cut.

    Returns:
        ClusterCut: At most ``2**k`` clusters.

    Raises:
        ValueError: ``k`` is negative.
    """
    if k < 0:
        raise ValueError(f"cluster level must be >= 0, got {k}")
    leaf = tree.left < 0
    selected = (tree.depth == k) | (leaf & (tree.depth < k))
    nodes = np.flatnonzero(selected)

    cluster_of_light = np.full(tree.light_count, -1, dtype=np.int64)
    for c, node in enumerate(nodes):
        cluster_of_light[tree.leaves_under(int(node))] = c
    logger.info("Cluster cut at level %d: S = %d clusters over %d lights.", k, len(nodes), tree.light_count)
    return ClusterCut(
        tree=tree,
        nodes=nodes,
        level=k,
        cluster_of_light=cluster_of_light,
        importance=ImportanceMode(importance),
    )


def baseline_weights_batch(cut: ClusterCut, queries: ShadingBatch) -> np.ndarray:
    """Unnormalised cluster weights w, shape (N, S), all entries > 0."""
    return node_importance_batch(
        cut.tree,
        cut.nodes[None, :],
        queries.positions[:, None, :],
        queries.normals[:, None, :],
        cut.importance,
    )


def baseline_weights(cut: ClusterCut, q: ShadingQuery) -> np.ndarray:
    """Unnormalised cluster weights w for one shading point, length S."""
    return baseline_weights_batch(cut, ShadingBatch.from_queries([q]))[0]
