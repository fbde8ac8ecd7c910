"""Structured JSON export of a light tree for inspection and golden tests."""

from pathlib import Path

from pydantic import BaseModel, Field

from lighttree.cut import ClusterCut
from lighttree.tree import LightTree
from utils.files import atomic_write_text
from utils.logging import get_logger

logger = get_logger(__name__)

DUMP_VERSION = 1


class ConeDump(BaseModel):
    axis: tuple[float, float, float]
    theta_o: float
    theta_e: float


class NodeDump(BaseModel):
    index: int
    depth: int
    bounds_min: tuple[float, float, float]
    bounds_max: tuple[float, float, float]
    power: float
    cone: ConeDump
    children: tuple[int, int] | None = None
    light_index: int | None = None
    cluster: int | None = Field(None, description="Cluster index when the node is part of the cut")


class LightTreeDump(BaseModel):
    version: int = DUMP_VERSION
    light_count: int
    node_count: int
    height: int
    cluster_level: int | None = None
    nodes: list[NodeDump]


def light_tree_dump(tree: LightTree, cut: ClusterCut | None = None) -> LightTreeDump:
    cluster_at = {int(n): c for c, n in enumerate(cut.nodes)} if cut is not None else {}
    nodes = []
    for i in range(tree.node_count):
        node = tree.node(i)
        nodes.append(
            NodeDump(
                index=i,
                depth=node.depth,
                bounds_min=tuple(float(x) for x in node.bounds_min),
                bounds_max=tuple(float(x) for x in node.bounds_max),
                power=node.power,
                cone=ConeDump(axis=node.cone.axis, theta_o=node.cone.theta_o, theta_e=node.cone.theta_e),
                children=node.children,
                light_index=node.light_index,
                cluster=cluster_at.get(i),
            )
        )
    return LightTreeDump(
        light_count=tree.light_count,
        node_count=tree.node_count,
        height=tree.height,
        cluster_level=cut.level if cut is not None else None,
        nodes=nodes,
    )


def dump_light_tree(tree: LightTree, path: str | Path, cut: ClusterCut | None = None) -> Path:
    """Write the tree (and, if given, the cut membership) as indented JSON."""
    path = atomic_write_text(path, light_tree_dump(tree, cut).model_dump_json(indent=2) + "\n")
    logger.info("Wrote light tree dump '%s' (%d nodes).", path, tree.node_count)
    return path
