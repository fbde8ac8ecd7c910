"""Reflectance models: Lambertian, a normalised Phong-style glossy lobe, and perfect mirrors."""

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from scene.geometry import dot, reflect
from scene.spectrum import Spectrum


class BsdfKind(IntEnum):
    LAMBERTIAN = 0
    ROUGH_GLOSSY = 1
    MIRROR = 2

    @classmethod
    def parse(cls, name: str) -> "BsdfKind":
        return {
            "lambertian": cls.LAMBERTIAN,
            "rough-glossy": cls.ROUGH_GLOSSY,
            "mirror": cls.MIRROR,
        }[name]


@dataclass(frozen=True)
class Bsdf:
    kind: BsdfKind
    albedo: Spectrum
    roughness: float = 1.0

    @property
    def exponent(self) -> float:
        """Lobe exponent; roughness 1 degenerates to the Lambertian lobe."""
        return max(2.0 / (self.roughness * self.roughness) - 2.0, 0.0)

    @property
    def is_specular(self) -> bool:
        return self.kind == BsdfKind.MIRROR


@dataclass(frozen=True)
class MaterialTable:
    """Struct-of-arrays view of every material, indexed by bsdf id."""

    kind: np.ndarray  # (K,) BsdfKind codes
    albedo: np.ndarray  # (K, 3)
    exponent: np.ndarray  # (K,)

    @classmethod
    def from_bsdfs(cls, bsdfs: list[Bsdf]) -> "MaterialTable":
        return cls(
            kind=np.array([int(b.kind) for b in bsdfs], dtype=np.int64),
            albedo=np.array([b.albedo.as_array() for b in bsdfs], dtype=np.float64).reshape(-1, 3),
            exponent=np.array([b.exponent for b in bsdfs], dtype=np.float64),
        )

    def is_specular(self, bsdf_ids: np.ndarray) -> np.ndarray:
        return self.kind[bsdf_ids] == BsdfKind.MIRROR

    def evaluate(
        self,
        bsdf_ids: np.ndarray,
        wo: np.ndarray,
        wi: np.ndarray,
        normals: np.ndarray,
    ) -> np.ndarray:
        """f_s(wo, wi) as (N, 3); zero below the surface and for delta lobes.

        The glossy lobe is ``albedo * (e + 2) / (2π) * cos^e(α)`` with α the angle
        between ``wi`` and the mirror direction of ``wo``; its directional albedo
        peaks at normal incidence where it equals ``albedo``.
        """
        kind = self.kind[bsdf_ids]
        albedo = self.albedo[bsdf_ids]
        e = self.exponent[bsdf_ids]
        above = (dot(wi, normals) > 0.0) & (dot(wo, normals) > 0.0)

        cos_alpha = np.clip(dot(reflect(wo, normals), wi), 0.0, 1.0)
        glossy = (e + 2.0) / (2.0 * np.pi) * np.power(cos_alpha, e)
        scale = np.where(
            kind == BsdfKind.LAMBERTIAN,
            1.0 / np.pi,
            np.where(kind == BsdfKind.ROUGH_GLOSSY, glossy, 0.0),
        )
        return albedo * np.where(above, scale, 0.0)[..., None]
