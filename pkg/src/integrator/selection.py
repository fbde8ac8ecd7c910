"""Light-selection strategies: each maps shading points and uniforms to a light and its pmf."""

from dataclasses import dataclass

import numpy as np

from integrator.config import Strategy
from lighttree.cut import ClusterCut, baseline_weights_batch
from lighttree.importance import ImportanceMode
from lighttree.sampling import sample_in_cluster_batch, traverse
from lighttree.tree import LightTree
from neural.network import NetworkState, predict_logits
from neural.pmf import residual_pmf_log
from scene.lights import LightTable
from scene.query import ShadingBatch


@dataclass(frozen=True)
class Selection:
    """Chosen light per shading point with the full selection pmf p(y).

    The cluster fields are only set by cluster-based (neural) selectors, where
    ``pmf == pmf_cluster · pmf_in_cluster``.
    """

    light: np.ndarray
    pmf: np.ndarray
    cluster: np.ndarray | None = None
    pmf_cluster: np.ndarray | None = None
    pmf_in_cluster: np.ndarray | None = None
    log_baseline: np.ndarray | None = None


def sample_discrete(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw per row of ``probs`` (N, K) with uniforms ``u`` (N,)."""
    cdf = np.cumsum(probs, axis=1)
    index = np.sum(cdf < (u * cdf[:, -1])[:, None], axis=1)
    return np.minimum(index, probs.shape[1] - 1)


class UniformSelector:
    strategy = Strategy.UNIFORM

    def __init__(self, light_count: int):
        self.light_count = light_count

    def select(self, queries: ShadingBatch, u: np.ndarray) -> Selection:
        m = self.light_count
        light = np.minimum((u[:, 0] * m).astype(np.int64), m - 1)
        return Selection(light=light, pmf=np.full(len(light), 1.0 / m))


class PowerSelector:
    """Global pmf Φ_y / ΣΦ; uniform if every light is black."""

    strategy = Strategy.POWER

    def __init__(self, lights: LightTable):
        power = np.asarray(lights.power, dtype=np.float64)
        total = power.sum()
        self.probs = power / total if total > 0.0 else np.full(len(power), 1.0 / len(power))
        self.cdf = np.cumsum(self.probs)

    def select(self, queries: ShadingBatch, u: np.ndarray) -> Selection:
        light = np.minimum(np.searchsorted(self.cdf, u[:, 0] * self.cdf[-1], side="right"), len(self.probs) - 1)
        return Selection(light=light, pmf=self.probs[light])


class TreeSelector:
    """Stochastic traversal from the root, the light-tree baseline."""

    strategy = Strategy.TREE_BASELINE

    def __init__(self, tree: LightTree, importance: ImportanceMode = ImportanceMode.GEO_COS):
        self.tree = tree
        self.importance = importance

    def select(self, queries: ShadingBatch, u: np.ndarray) -> Selection:
        root = np.zeros(len(queries), dtype=np.int64)
        light, pmf = traverse(self.tree, root, queries.positions, queries.normals, u[:, 1], self.importance)
        return Selection(light=light, pmf=pmf)


class NeuralSelector:
    """
    Cluster pmf from the network, then traversal inside the chosen cluster.

    ``residual`` combines the logits with the cut's baseline weights; otherwise
    the baseline is uniform and the network predicts the cluster pmf directly.
    """

    def __init__(self, cut: ClusterCut, snapshot: NetworkState, residual: bool = True):
        self.cut = cut
        self.snapshot = snapshot
        self.residual = residual
        self.strategy = Strategy.NEURAL_RESIDUAL if residual else Strategy.NEURAL_DIRECT

    def cluster_pmf(self, queries: ShadingBatch) -> tuple[np.ndarray, np.ndarray]:
        """(probs, log_baseline), both (N, S)."""
        if self.residual:
            log_w = np.log(baseline_weights_batch(self.cut, queries))
        else:
            log_w = np.zeros((len(queries), self.cut.size))
        logits = predict_logits(self.snapshot, queries)
        return residual_pmf_log(logits, log_w), log_w

    def select(self, queries: ShadingBatch, u: np.ndarray) -> Selection:
        probs, log_w = self.cluster_pmf(queries)
        cluster = sample_discrete(probs, u[:, 0])
        light, pmf_in_cluster = sample_in_cluster_batch(
            self.cut, cluster, queries.positions, queries.normals, u[:, 1]
        )
        pmf_cluster = probs[np.arange(len(cluster)), cluster]
        return Selection(
            light=light,
            pmf=pmf_cluster * pmf_in_cluster,
            cluster=cluster,
            pmf_cluster=pmf_cluster,
            pmf_in_cluster=pmf_in_cluster,
            log_baseline=log_w,
        )


LightSelector = UniformSelector | PowerSelector | TreeSelector | NeuralSelector
