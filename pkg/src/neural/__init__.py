from .checkpoint import (
    CHECKPOINT_VERSION,
    checkpoint_bytes,
    checkpoint_from_bytes,
    checkpoint_load,
    checkpoint_save,
)
from .network import (
    HIDDEN_LAYERS,
    ForwardCache,
    NetworkState,
    backward,
    encode_queries,
    forward,
    forward_cached,
    init_network,
    predict_logits,
)
from .pmf import log_softmax, residual_pmf, residual_pmf_log
from .toy import ClusterToy
from .training import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_LEARNING_RATE,
    OnlineTrainer,
    TrainingBatch,
    TrainingRecord,
    adam_step,
    importance_ratios,
    kl_gradient_batch,
    kl_loss_and_gradient,
)

__all__ = [
    "CHECKPOINT_VERSION",
    "checkpoint_bytes",
    "checkpoint_from_bytes",
    "checkpoint_load",
    "checkpoint_save",
    "HIDDEN_LAYERS",
    "ForwardCache",
    "NetworkState",
    "backward",
    "encode_queries",
    "forward",
    "forward_cached",
    "init_network",
    "predict_logits",
    "log_softmax",
    "residual_pmf",
    "residual_pmf_log",
    "ClusterToy",
    "DEFAULT_BATCH_SIZE",
    "DEFAULT_LEARNING_RATE",
    "OnlineTrainer",
    "TrainingBatch",
    "TrainingRecord",
    "adam_step",
    "importance_ratios",
    "kl_gradient_batch",
    "kl_loss_and_gradient",
]
