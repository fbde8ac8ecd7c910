"""Online training: records, the KL gradient and Adam."""

from dataclasses import dataclass

import numpy as np

from neural.network import NetworkState, backward, encode_queries, forward_cached
from neural.pmf import log_softmax, residual_pmf_log
from scene.query import ShadingBatch, ShadingQuery
from utils.errors import InvalidRecordError
from utils.logging import get_logger

logger = get_logger(__name__)

DEFAULT_LEARNING_RATE = 3e-2
DEFAULT_BATCH_SIZE = 16384
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8
# importance ratios are clamped to this multiple of the batch median
WEIGHT_CLAMP_FACTOR = 1e4


@dataclass(frozen=True)
class TrainingRecord:
    """One traced light sample and every probability factor that produced it."""

    query: ShadingQuery
    cluster: int
    light: int
    f_estimate: float
    pdf_area: float
    pmf_in_cluster: float
    pmf_cluster: float
    log_baseline: np.ndarray  # (S,) log w at the query


@dataclass(frozen=True)
class TrainingBatch:
    """Struct-of-arrays form of `TrainingRecord`s, the unit consumed by training."""

    queries: ShadingBatch
    cluster: np.ndarray  # (N,)
    light: np.ndarray
    f_estimate: np.ndarray  # luminance of F
    pdf_area: np.ndarray
    pmf_in_cluster: np.ndarray
    pmf_cluster: np.ndarray
    log_baseline: np.ndarray  # (N, S)

    def __len__(self) -> int:
        return len(self.cluster)

    def __getitem__(self, index: slice | np.ndarray) -> "TrainingBatch":
        return TrainingBatch(
            queries=self.queries.subset(index),
            cluster=self.cluster[index],
            light=self.light[index],
            f_estimate=self.f_estimate[index],
            pdf_area=self.pdf_area[index],
            pmf_in_cluster=self.pmf_in_cluster[index],
            pmf_cluster=self.pmf_cluster[index],
            log_baseline=self.log_baseline[index],
        )

    def record(self, i: int) -> TrainingRecord:
        return TrainingRecord(
            query=self.queries[i],
            cluster=int(self.cluster[i]),
            light=int(self.light[i]),
            f_estimate=float(self.f_estimate[i]),
            pdf_area=float(self.pdf_area[i]),
            pmf_in_cluster=float(self.pmf_in_cluster[i]),
            pmf_cluster=float(self.pmf_cluster[i]),
            log_baseline=self.log_baseline[i],
        )

    @classmethod
    def from_records(cls, records: list[TrainingRecord]) -> "TrainingBatch":
        return cls(
            queries=ShadingBatch.from_queries([r.query for r in records]),
            cluster=np.array([r.cluster for r in records], dtype=np.int64),
            light=np.array([r.light for r in records], dtype=np.int64),
            f_estimate=np.array([r.f_estimate for r in records], dtype=np.float64),
            pdf_area=np.array([r.pdf_area for r in records], dtype=np.float64),
            pmf_in_cluster=np.array([r.pmf_in_cluster for r in records], dtype=np.float64),
            pmf_cluster=np.array([r.pmf_cluster for r in records], dtype=np.float64),
            log_baseline=np.stack([np.asarray(r.log_baseline, dtype=np.float64) for r in records]),
        )

    @classmethod
    def concatenate(cls, batches: list["TrainingBatch"]) -> "TrainingBatch":
        return cls(
            queries=ShadingBatch.concatenate([b.queries for b in batches]),
            cluster=np.concatenate([b.cluster for b in batches]),
            light=np.concatenate([b.light for b in batches]),
            f_estimate=np.concatenate([b.f_estimate for b in batches]),
            pdf_area=np.concatenate([b.pdf_area for b in batches]),
            pmf_in_cluster=np.concatenate([b.pmf_in_cluster for b in batches]),
            pmf_cluster=np.concatenate([b.pmf_cluster for b in batches]),
            log_baseline=np.concatenate([b.log_baseline for b in batches]),
        )

    def validate(self) -> None:
        """
        Raises:
            InvalidRecordError: A field is non-finite, a probability factor is not
                positive, or ``f_estimate`` is negative.
        """
        checks = {
            "f_estimate": self.f_estimate,
            "pdf_area": self.pdf_area,
            "pmf_in_cluster": self.pmf_in_cluster,
            "pmf_cluster": self.pmf_cluster,
            "log_baseline": self.log_baseline,
            "positions": self.queries.positions,
            "out_dirs": self.queries.out_dirs,
            "normals": self.queries.normals,
        }
        for name, values in checks.items():
            bad = ~np.isfinite(values)
            if bad.any():
                row = int(np.argwhere(bad)[0][0])
                raise InvalidRecordError(f"record field '{name}' is not finite", field=name, record=row)
        for name in ("pdf_area", "pmf_in_cluster", "pmf_cluster"):
            bad = getattr(self, name) <= 0.0
            if bad.any():
                row = int(np.flatnonzero(bad)[0])
                raise InvalidRecordError(f"record field '{name}' must be > 0", field=name, record=row)
        if (self.f_estimate < 0.0).any():
            row = int(np.flatnonzero(self.f_estimate < 0.0)[0])
            raise InvalidRecordError("record field 'f_estimate' must be >= 0", field="f_estimate", record=row)
        if self.log_baseline.ndim != 2 or len(self.log_baseline) != len(self):
            raise InvalidRecordError("log_baseline must have one row per record", field="log_baseline")


def importance_ratios(batch: TrainingBatch, clamp: bool = True) -> np.ndarray:
    """
    f / (p(l|y) · p(y|c) · p_θ(c)) per record, using the generation-time pmfs.

    With ``clamp`` the ratios are capped at ``WEIGHT_CLAMP_FACTOR`` times the
    median of the positive ratios.
    """
    ratio = batch.f_estimate / (batch.pdf_area * batch.pmf_in_cluster * batch.pmf_cluster)
    if clamp:
        positive = ratio[ratio > 0.0]
        if len(positive):
            ratio = np.minimum(ratio, WEIGHT_CLAMP_FACTOR * float(np.median(positive)))
    return ratio


def kl_loss_and_gradient(
    state: NetworkState, batch: TrainingBatch, clamp: bool = True
) -> tuple[float, dict[str, np.ndarray]]:
    """
    Weighted negative log-likelihood and its gradient.

    The loss is ``(1/N) Σ_j r_j · (−log p_θ(C_j | query_j))`` where ``r_j`` is the
    record's importance ratio, held constant, and p_θ is recomputed under the
    current parameters. Its gradient is the self-normalised KL gradient.

    Raises:
        InvalidRecordError: The batch is empty or a record violates its invariants.
    """
    if len(batch) == 0:
        raise InvalidRecordError("training batch is empty")
    batch.validate()
    n = len(batch)
    ratio = importance_ratios(batch, clamp)

    features, footprint = encode_queries(state, batch.queries)
    cache = forward_cached(state, features, footprint)
    scores = batch.log_baseline + cache.logits
    log_p = log_softmax(scores)
    rows = np.arange(n)
    loss = float(np.sum(ratio * -log_p[rows, batch.cluster]) / n)

    probs = residual_pmf_log(cache.logits, batch.log_baseline)
    onehot = np.zeros_like(probs)
    onehot[rows, batch.cluster] = 1.0
    dlogits = -(ratio[:, None] * (onehot - probs)) / n
    return loss, backward(state, cache, dlogits)


def kl_gradient_batch(state: NetworkState, batch: TrainingBatch, clamp: bool = True) -> dict[str, np.ndarray]:
    """
    Gradient −(1/N) Σ_j r_j ∇_θ log p_θ(C_j | query_j) over every parameter.

    Arguments:
        state (NetworkState): Current parameters.
        batch (TrainingBatch): Non-empty records.
        clamp (bool, optional): Cap importance ratios at 1e4 × the batch median.

    Returns:
        dict[str, np.ndarray]: float64 gradients keyed like ``state.params``.

    Raises:
        InvalidRecordError: Non-finite or non-positive record fields, or an empty batch.
    """
    _, grads = kl_loss_and_gradient(state, batch, clamp)
    return grads


def adam_step(state: NetworkState, grads: dict[str, np.ndarray], lr: float = DEFAULT_LEARNING_RATE) -> NetworkState:
    """
    One bias-corrected Adam update (β₁ = 0.9, β₂ = 0.999, ε = 1e-8), in place.

    Returns:
        NetworkState: ``state``, with ``step`` incremented.
    """
    state.step += 1
    t = state.step
    correction1 = 1.0 - ADAM_BETA1**t
    correction2 = 1.0 - ADAM_BETA2**t
    for name, param in state.params.items():
        g = np.asarray(grads[name], dtype=np.float64)
        if g.shape != param.shape:
            raise ValueError(f"gradient for '{name}' has shape {g.shape}, expected {param.shape}")
        m = ADAM_BETA1 * state.m[name] + (1.0 - ADAM_BETA1) * g
        v = ADAM_BETA2 * state.v[name] + (1.0 - ADAM_BETA2) * g * g
        state.m[name][...] = m
        state.v[name][...] = v
        update = lr * (m / correction1) / (np.sqrt(v / correction2) + ADAM_EPSILON)
        param -= update.astype(param.dtype)
    return state


class OnlineTrainer:
    """
    Single-writer owner of a `NetworkState` during rendering.

    Arguments:
        state (NetworkState): Parameters to train in place.
        lr (float, optional): Adam learning rate. Defaults to 3e-2.
        batch_size (int, optional): Records per Adam step. Defaults to 16384.
        weight_clamp (bool, optional): Clamp importance ratios. Defaults to True.
    """

    def __init__(
        self,
        state: NetworkState,
        lr: float = DEFAULT_LEARNING_RATE,
        batch_size: int = DEFAULT_BATCH_SIZE,
        weight_clamp: bool = True,
    ):
        self.state = state
        self.lr = lr
        self.batch_size = batch_size
        self.weight_clamp = weight_clamp
        self.losses: list[float] = []

    def train(self, batch: TrainingBatch) -> int:
        """Run Adam over ``batch`` in consecutive chunks of ``batch_size``; returns steps taken."""
        steps = 0
        for start in range(0, len(batch), self.batch_size):
            chunk = batch[start : start + self.batch_size]
            loss, grads = kl_loss_and_gradient(self.state, chunk, self.weight_clamp)
            adam_step(self.state, grads, self.lr)
            self.losses.append(loss)
            steps += 1
            logger.debug("Adam step %d: %d records, loss %.6g.", self.state.step, len(chunk), loss)
        return steps

    def snapshot(self) -> NetworkState:
        return self.state.snapshot()
