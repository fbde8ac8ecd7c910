"""Image error metrics against a reference."""

import numpy as np
from pydantic import BaseModel

RELMSE_OFFSET = 0.01


class ImageMetrics(BaseModel):
    mse: float
    relmse: float


def compute_metrics(image: np.ndarray, reference: np.ndarray) -> ImageMetrics:
    """
    MSE and relMSE averaged over every pixel and channel.

    relMSE divides each squared error by ``(reference + 0.01)²``.

    Raises:
        ValueError: The shapes differ.
    """
    image = np.asarray(image, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    if image.shape != reference.shape:
        raise ValueError(f"image shape {image.shape} does not match reference {reference.shape}")
    err2 = (image - reference) ** 2
    return ImageMetrics(
        mse=float(err2.mean()),
        relmse=float((err2 / (reference + RELMSE_OFFSET) ** 2).mean()),
    )
