"""Conservative per-node importance of a light subtree for a shading point."""

from enum import StrEnum

import numpy as np

from lighttree.tree import LightTree

# relative floor: a culled node keeps 1e-6 of its unculled power/distance bound
IMPORTANCE_EPS = 1e-6
# sibling floor applied at each branching before normalisation
BRANCH_FLOOR = 1e-6
_ABSOLUTE_FLOOR = 1e-300


class ImportanceMode(StrEnum):
    """Which factors `node_importance` multiplies together.

    ``power``
        Φ only.
    ``geo``
        Φ · cone bound / d².
    ``geo-cos``
        Φ · cone bound · cosine bound at the shading normal / d².
    """

    POWER = "power"
    GEO = "geo"
    GEO_COS = "geo-cos"


def _angle_between(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.arccos(np.clip(np.sum(a * b, axis=-1), -1.0, 1.0))


def node_importance_batch(
    tree: LightTree,
    nodes: np.ndarray,
    positions: np.ndarray,
    normals: np.ndarray,
    mode: ImportanceMode = ImportanceMode.GEO_COS,
) -> np.ndarray:
    """
    Importance of ``nodes`` seen from shading points, broadcasting ``nodes[...]``
    against ``positions[..., :]``.

    The distance to the node is the distance to its bounds centre, clamped from
    below by half the bounds diagonal so that points inside the bounds stay
    finite. The bounding-sphere half-angle θ_b widens both cosine bounds; it is π
    (no bound) inside the sphere. A node whose emission cone cannot reach the
    point is culled to the floor ``IMPORTANCE_EPS · Φ / d²`` instead of zero.

    Arguments:
        tree (LightTree): The hierarchy.
        nodes (np.ndarray): Integer node indices, any shape broadcastable against positions.
        positions (np.ndarray): Shading positions, shape (..., 3).
        normals (np.ndarray): Unit shading normals, same shape as positions.
        mode (ImportanceMode, optional): Factors to include. Defaults to ``geo-cos``.

    Returns:
        np.ndarray: Strictly positive, finite importances of the broadcast shape.
    """
    mode = ImportanceMode(mode)
    nodes = np.asarray(nodes, dtype=np.int64)
    power = tree.power[nodes]
    if mode == ImportanceMode.POWER:
        return np.maximum(power, _ABSOLUTE_FLOOR)

    lo = tree.bounds_min[nodes]
    hi = tree.bounds_max[nodes]
    center = 0.5 * (lo + hi)
    half_diag = 0.5 * np.linalg.norm(hi - lo, axis=-1)
    to_node = center - positions
    dist = np.linalg.norm(to_node, axis=-1)
    d2 = np.maximum(dist * dist, half_diag * half_diag)
    inside = dist <= half_diag
    safe = np.where(dist > 0.0, dist, 1.0)[..., None]
    direction = to_node / safe

    with np.errstate(invalid="ignore"):
        theta_b = np.where(inside, np.pi, np.arcsin(np.clip(half_diag / np.where(inside, 1.0, dist), 0.0, 1.0)))

    # angle between the node axis and the direction from the node to the point
    theta = _angle_between(tree.axis[nodes], -direction)
    theta_prime = np.maximum(0.0, theta - tree.theta_o[nodes] - theta_b)
    cone = np.where(theta_prime < tree.theta_e[nodes], np.cos(theta_prime), 0.0)
    cone = np.where(inside, 1.0, cone)

    base = power / d2
    importance = base * cone
    if mode == ImportanceMode.GEO_COS:
        theta_i = _angle_between(normals, direction)
        cos_i = np.cos(np.maximum(0.0, theta_i - theta_b))
        importance = importance * np.where(inside, 1.0, np.maximum(cos_i, 0.0))

    importance = np.maximum(importance, IMPORTANCE_EPS * base)
    return np.maximum(importance, _ABSOLUTE_FLOOR)


def node_importance(
    tree: LightTree,
    node: int,
    position: np.ndarray,
    normal: np.ndarray,
    mode: ImportanceMode = ImportanceMode.GEO_COS,
) -> float:
    """Scalar form of `node_importance_batch` for a single node and shading point."""
    return float(
        node_importance_batch(
            tree,
            np.asarray(node),
            np.asarray(position, dtype=np.float64),
            np.asarray(normal, dtype=np.float64),
            mode,
        )
    )


def left_probability(
    tree: LightTree,
    nodes: np.ndarray,
    positions: np.ndarray,
    normals: np.ndarray,
    mode: ImportanceMode = ImportanceMode.GEO_COS,
) -> np.ndarray:
    """Probability of descending into the left child of each internal node.

    Each child's importance is floored at ``BRANCH_FLOOR`` times the larger
    sibling, so both children stay reachable.
    """
    nodes = np.asarray(nodes, dtype=np.int64)
    left = node_importance_batch(tree, tree.left[nodes], positions, normals, mode)
    right = node_importance_batch(tree, tree.right[nodes], positions, normals, mode)
    floor = BRANCH_FLOOR * np.maximum(left, right)
    left = np.maximum(left, floor)
    right = np.maximum(right, floor)
    total = left + right
    return np.where(total > 0.0, left / np.where(total > 0.0, total, 1.0), 0.5)
