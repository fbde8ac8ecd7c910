"""Stochastic traversal inside a cluster and the matching conditional pmf p(y|c)."""

from dataclasses import dataclass

import numpy as np

from lighttree.cut import ClusterCut
from lighttree.importance import ImportanceMode, left_probability
from lighttree.tree import LightTree
from scene.query import ShadingQuery
from utils.errors import LightNotInClusterError

# keeps a rescaled uniform strictly below 1
_ONE_MINUS_EPS = float(np.nextafter(1.0, 0.0))


@dataclass(frozen=True)
class ClusterSample:
    cluster: int
    light: int
    pmf_in_cluster: float


def traverse(
    tree: LightTree,
    start: np.ndarray,
    positions: np.ndarray,
    normals: np.ndarray,
    u: np.ndarray,
    mode: ImportanceMode = ImportanceMode.GEO_COS,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Descend from ``start`` nodes to leaves, one traversal per row.

    At each internal node the left child is taken with probability
    `left_probability`; the single uniform per row is rescaled into the chosen
    branch so one variate drives the whole descent.

    Arguments:
        tree (LightTree): The hierarchy.
        start (np.ndarray): (N,) starting node per row.
        positions (np.ndarray): (N, 3) shading positions.
        normals (np.ndarray): (N, 3) shading normals.
        u (np.ndarray): (N,) uniforms in [0, 1).
        mode (ImportanceMode, optional): Importance rule.

    Returns:
        tuple[np.ndarray, np.ndarray]: Light index and product of branch
        probabilities along the path, per row.
    """
    node = np.asarray(start, dtype=np.int64).copy()
    u = np.asarray(u, dtype=np.float64).copy()
    pmf = np.ones(len(node))
    active = np.flatnonzero(tree.left[node] >= 0)
    while len(active):
        n = node[active]
        p_left = left_probability(tree, n, positions[active], normals[active], mode)
        ua = u[active]
        go_left = ua < p_left
        node[active] = np.where(go_left, tree.left[n], tree.right[n])
        chosen = np.where(go_left, p_left, 1.0 - p_left)
        pmf[active] *= chosen
        rescaled = np.where(go_left, ua / p_left, (ua - p_left) / np.where(go_left, 1.0, 1.0 - p_left))
        u[active] = np.clip(rescaled, 0.0, _ONE_MINUS_EPS)
        active = active[tree.left[node[active]] >= 0]
    return tree.light[node], pmf


def sample_in_cluster_batch(
    cut: ClusterCut,
    clusters: np.ndarray,
    positions: np.ndarray,
    normals: np.ndarray,
    u: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Batched `sample_in_cluster`: (light, p(y|c)) per row."""
    return traverse(
        cut.tree, cut.nodes[np.asarray(clusters, dtype=np.int64)], positions, normals, u, cut.importance
    )


def sample_in_cluster(cut: ClusterCut, c: int, q: ShadingQuery, u: float) -> ClusterSample:
    """
    Pick a light inside cluster ``c`` by stochastic descent.

    Returns:
        ClusterSample: The light and its conditional pmf; a cluster that is a leaf
        returns its light with pmf 1.
    """
    lights, pmf = sample_in_cluster_batch(
        cut,
        np.array([c]),
        np.asarray(q.position, dtype=np.float64)[None],
        np.asarray(q.normal, dtype=np.float64)[None],
        np.array([u]),
    )
    return ClusterSample(cluster=c, light=int(lights[0]), pmf_in_cluster=float(pmf[0]))


def path_pmf(
    tree: LightTree,
    top: np.ndarray,
    lights: np.ndarray,
    positions: np.ndarray,
    normals: np.ndarray,
    mode: ImportanceMode = ImportanceMode.GEO_COS,
) -> np.ndarray:
    """
    Product of branch probabilities from ``top`` down to each light's leaf.

    Rows whose light is not below ``top`` get NaN.
    """
    top = np.asarray(top, dtype=np.int64)
    node = tree.leaf_of_light[np.asarray(lights, dtype=np.int64)].copy()
    pmf = np.ones(len(node))
    found = node == top
    active = np.flatnonzero(~found)
    while len(active):
        child = node[active]
        parent = tree.parent[child]
        orphan = parent < 0
        pmf[active[orphan]] = np.nan
        active, child, parent = active[~orphan], child[~orphan], parent[~orphan]
        if not len(active):
            break
        p_left = left_probability(tree, parent, positions[active], normals[active], mode)
        pmf[active] *= np.where(tree.left[parent] == child, p_left, 1.0 - p_left)
        node[active] = parent
        active = active[parent != top[active]]
    return pmf


def pmf_in_cluster_batch(
    cut: ClusterCut,
    clusters: np.ndarray,
    lights: np.ndarray,
    positions: np.ndarray,
    normals: np.ndarray,
) -> np.ndarray:
    """Batched `pmf_in_cluster_of`; raises if any light lies outside its cluster."""
    clusters = np.asarray(clusters, dtype=np.int64)
    lights = np.asarray(lights, dtype=np.int64)
    outside = cut.cluster_of_light[lights] != clusters
    if outside.any():
        i = int(np.flatnonzero(outside)[0])
        raise LightNotInClusterError(
            f"light {int(lights[i])} is not in cluster {int(clusters[i])}",
            light=int(lights[i]),
            cluster=int(clusters[i]),
        )
    return path_pmf(cut.tree, cut.nodes[clusters], lights, positions, normals, cut.importance)


def pmf_in_cluster_of(cut: ClusterCut, c: int, y: int, q: ShadingQuery) -> float:
    """
    Conditional probability p(y|c) that descent from cluster ``c`` reaches light ``y``.

    Raises:
        LightNotInClusterError: ``y`` is not a descendant of cluster ``c``.
    """
    return float(
        pmf_in_cluster_batch(
            cut,
            np.array([c]),
            np.array([y]),
            np.asarray(q.position, dtype=np.float64)[None],
            np.asarray(q.normal, dtype=np.float64)[None],
        )[0]
    )
