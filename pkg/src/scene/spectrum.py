"""RGB radiance values and their scalar reduction."""

from dataclasses import dataclass

import numpy as np

# Rec. 709 luminance weights; the scalar every PMF and training weight is built from.
LUMINANCE_WEIGHTS = np.array([0.2126, 0.7152, 0.0722])


@dataclass(frozen=True, slots=True)
class Spectrum:
    """Linear RGB triple in relative radiance units."""

    r: float = 0.0
    g: float = 0.0
    b: float = 0.0

    @classmethod
    def from_array(cls, values: np.ndarray) -> "Spectrum":
        r, g, b = (float(v) for v in np.asarray(values, dtype=np.float64).reshape(3))
        return cls(r, g, b)

    def as_array(self) -> np.ndarray:
        return np.array([self.r, self.g, self.b], dtype=np.float64)

    def luminance(self) -> float:
        return float(self.as_array() @ LUMINANCE_WEIGHTS)

    def is_black(self) -> bool:
        return self.r == 0.0 and self.g == 0.0 and self.b == 0.0

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.as_array())))


def luminance(rgb: np.ndarray) -> np.ndarray:
    """Luminance of an (..., 3) RGB array."""
    return np.asarray(rgb, dtype=np.float64) @ LUMINANCE_WEIGHTS
