"""Pinhole camera."""

from dataclasses import dataclass

import numpy as np

from scene.geometry import normalize


@dataclass(frozen=True)
class Camera:
    position: np.ndarray
    look_at: np.ndarray
    up: np.ndarray
    fov_deg: float

    def generate_rays(
        self,
        px: np.ndarray,
        py: np.ndarray,
        jitter: np.ndarray,
        width: int,
        height: int,
    ) -> tuple[np.ndarray, np.ndarray]:
        """Rays through pixel (px, py) offset by ``jitter`` in [0,1)²; row 0 is the top row."""
        forward = normalize(self.look_at - self.position)
        right = normalize(np.cross(forward, self.up))
        true_up = np.cross(right, forward)
        tan_half = np.tan(np.radians(self.fov_deg) * 0.5)
        aspect = width / height
        sx = (2.0 * (px + jitter[:, 0]) / width - 1.0) * tan_half * aspect
        sy = (1.0 - 2.0 * (py + jitter[:, 1]) / height) * tan_half
        dirs = normalize(forward + sx[:, None] * right + sy[:, None] * true_up)
        origins = np.broadcast_to(self.position, dirs.shape).copy()
        return origins, dirs
