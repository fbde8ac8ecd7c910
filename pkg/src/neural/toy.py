"""A cluster-selection problem with exactly known per-cluster contributions.

One fixed shading query, S clusters each containing a single unit-pdf light whose
contribution is known in closed form. The optimal cluster pmf is the normalised
contribution vector q, so D_KL(q ‖ p_θ) and its gradient are analytic.
"""

from dataclasses import dataclass

import numpy as np

from neural.network import NetworkState, backward, encode_queries, forward_cached, init_network
from neural.pmf import residual_pmf_log
from neural.training import TrainingBatch
from scene.query import ShadingBatch

TOY_CONTRIBUTIONS = (8.0, 3.0, 1.0, 0.25)


@dataclass
class ClusterToy:
    contributions: np.ndarray  # (S,) > 0
    log_baseline: np.ndarray  # (S,)
    query: ShadingBatch  # one row

    @classmethod
    def default(cls, baseline: tuple[float, ...] | None = None) -> "ClusterToy":
        contributions = np.asarray(TOY_CONTRIBUTIONS, dtype=np.float64)
        w = np.ones_like(contributions) if baseline is None else np.asarray(baseline, dtype=np.float64)
        query = ShadingBatch(
            positions=np.array([[0.5, 0.5, 0.5]]),
            out_dirs=np.array([[0.0, 0.0, 1.0]]),
            normals=np.array([[0.0, 0.0, 1.0]]),
            bsdf_ids=np.array([0]),
        )
        return cls(contributions=contributions, log_baseline=np.log(w), query=query)

    @property
    def cluster_count(self) -> int:
        return len(self.contributions)

    @property
    def target(self) -> np.ndarray:
        return self.contributions / self.contributions.sum()

    def network(self, seed: int = 0, hidden: tuple[int, ...] = (64, 64, 64), dtype=np.float32) -> NetworkState:
        return init_network(
            self.cluster_count, np.zeros(3), np.ones(3), seed=seed, hidden=hidden, dtype=dtype
        )

    def pmf(self, state: NetworkState) -> np.ndarray:
        features, footprint = encode_queries(state, self.query)
        logits = forward_cached(state, features, footprint).logits[0]
        return residual_pmf_log(logits, self.log_baseline)

    def kl_divergence(self, state: NetworkState) -> float:
        """D_KL(q ‖ p_θ), evaluated exactly."""
        q = self.target
        return float(np.sum(q * (np.log(q) - np.log(self.pmf(state)))))

    def sample_batch(self, state: NetworkState, rng: np.random.Generator, n: int) -> TrainingBatch:
        """``n`` records with clusters drawn from the current p_θ."""
        p = self.pmf(state)
        clusters = rng.choice(self.cluster_count, size=n, p=p)
        ones = np.ones(n)
        return TrainingBatch(
            queries=self.query.subset(np.zeros(n, dtype=np.int64)),
            cluster=clusters,
            light=clusters.copy(),
            f_estimate=self.contributions[clusters],
            pdf_area=ones,
            pmf_in_cluster=ones.copy(),
            pmf_cluster=p[clusters],
            log_baseline=np.broadcast_to(self.log_baseline, (n, self.cluster_count)).copy(),
        )

    def analytic_gradient(self, state: NetworkState) -> dict[str, np.ndarray]:
        """Expected value of `kl_gradient_batch` without clamping: −Σ_c contribution_c ∇ log p_θ(c)."""
        features, footprint = encode_queries(state, self.query)
        cache = forward_cached(state, features, footprint)
        p = residual_pmf_log(cache.logits[0], self.log_baseline)
        # Σ_c a_c (onehot_c - p) = a - p·Σa
        dlogits = -(self.contributions - p * self.contributions.sum())[None, :]
        return backward(state, cache, dlogits)
