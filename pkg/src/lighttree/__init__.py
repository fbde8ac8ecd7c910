from .cone import OrientationCone
from .cut import ClusterCut, baseline_weights, baseline_weights_batch, select_cut
from .dump import LightTreeDump, dump_light_tree, light_tree_dump
from .importance import (
    IMPORTANCE_EPS,
    ImportanceMode,
    left_probability,
    node_importance,
    node_importance_batch,
)
from .sampling import (
    ClusterSample,
    path_pmf,
    pmf_in_cluster_batch,
    pmf_in_cluster_of,
    sample_in_cluster,
    sample_in_cluster_batch,
    traverse,
)
from .tree import SAOH_BUCKETS, LightTree, LightTreeNode, build_tree

__all__ = [
    "OrientationCone",
    "ClusterCut",
    "baseline_weights",
    "baseline_weights_batch",
    "select_cut",
    "LightTreeDump",
    "dump_light_tree",
    "light_tree_dump",
    "IMPORTANCE_EPS",
    "ImportanceMode",
    "left_probability",
    "node_importance",
    "node_importance_batch",
    "ClusterSample",
    "path_pmf",
    "pmf_in_cluster_batch",
    "pmf_in_cluster_of",
    "sample_in_cluster",
    "sample_in_cluster_batch",
    "traverse",
    "SAOH_BUCKETS",
    "LightTree",
    "LightTreeNode",
    "build_tree",
]
