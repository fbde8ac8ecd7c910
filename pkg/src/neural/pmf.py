"""Combining baseline cluster weights with learned residual logits."""

import numpy as np


def log_softmax(scores: np.ndarray) -> np.ndarray:
    m = np.max(scores, axis=-1, keepdims=True)
    shifted = scores - m
    return shifted - np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))


def residual_pmf_log(logits: np.ndarray, log_w: np.ndarray) -> np.ndarray:
    """`residual_pmf` with the baseline already in the log domain."""
    scores = np.asarray(log_w, dtype=np.float64) + np.asarray(logits, dtype=np.float64)
    m = np.max(scores, axis=-1, keepdims=True)
    # exp(-700) is still a normal double, so every entry stays positive
    e = np.exp(np.maximum(scores - m, -700.0))
    return e / np.sum(e, axis=-1, keepdims=True)


def residual_pmf(logits: np.ndarray, w: np.ndarray) -> np.ndarray:
    """
    Cluster pmf ``softmax(log w + f_θ)`` over the last axis.

    The max of the combined scores is subtracted before exponentiation. With
    all-zero logits the result is ``w / Σ w``.

    Arguments:
        logits (np.ndarray): (..., S) finite residual logits.
        w (np.ndarray): (..., S) strictly positive baseline weights.

    Returns:
        np.ndarray: (..., S) probabilities, all > 0 and summing to 1.
    """
    return residual_pmf_log(logits, np.log(np.asarray(w, dtype=np.float64)))
