"""Orientation cones bounding the emission directions of a group of lights."""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class OrientationCone:
    """Normals lie within ``theta_o`` of ``axis``; emission falls off over a further ``theta_e``."""

    axis: tuple[float, float, float]
    theta_o: float
    theta_e: float

    def union(self, other: "OrientationCone") -> "OrientationCone":
        theta_e = max(self.theta_e, other.theta_e)
        a = np.asarray(self.axis)
        b = np.asarray(other.axis)
        theta_d = math.acos(float(np.clip(a @ b, -1.0, 1.0)))
        if min(theta_d + other.theta_o, math.pi) <= self.theta_o:
            return OrientationCone(self.axis, self.theta_o, theta_e)
        if min(theta_d + self.theta_o, math.pi) <= other.theta_o:
            return OrientationCone(other.axis, other.theta_o, theta_e)
        theta_o = 0.5 * (self.theta_o + theta_d + other.theta_o)
        if theta_o >= math.pi:
            return OrientationCone(self.axis, math.pi, theta_e)
        rotation_axis = np.cross(a, b)
        norm = float(np.linalg.norm(rotation_axis))
        if norm < 1e-12:
            return OrientationCone(self.axis, math.pi, theta_e)
        k = rotation_axis / norm
        theta_r = theta_o - self.theta_o
        # Rodrigues rotation of a about k by theta_r
        w = a * math.cos(theta_r) + np.cross(k, a) * math.sin(theta_r) + k * (k @ a) * (1.0 - math.cos(theta_r))
        w /= np.linalg.norm(w)
        return OrientationCone(tuple(float(x) for x in w), theta_o, theta_e)

    def measure(self) -> float:
        """Solid-angle style measure M_Ω used by the surface-area-orientation heuristic."""
        theta_o = self.theta_o
        theta_w = min(theta_o + self.theta_e, math.pi)
        return 2.0 * math.pi * (1.0 - math.cos(theta_o)) + 0.5 * math.pi * (
            2.0 * theta_w * math.sin(theta_o)
            - math.cos(theta_o - 2.0 * theta_w)
            - 2.0 * theta_o * math.sin(theta_o)
            + math.cos(theta_o)
        )
