from .bsdf import Bsdf, BsdfKind, MaterialTable
from .camera import Camera
from .document import SceneDocument, build_scene
from .lights import Light, LightKind, LightSampleBatch, LightSamplePoint, LightTable
from .loader import load_scene, parse_scene_document, write_scene_document
from .procedural import (
    ProceduralSceneSpec,
    generate_procedural_scene,
    occlusion_preset,
    procedural_document,
)
from .query import ShadingBatch, ShadingQuery
from .scene import Hit, HitBatch, Scene
from .spectrum import Spectrum, luminance

__all__ = [
    "Bsdf",
    "BsdfKind",
    "MaterialTable",
    "Camera",
    "SceneDocument",
    "build_scene",
    "Light",
    "LightKind",
    "LightSampleBatch",
    "LightSamplePoint",
    "LightTable",
    "load_scene",
    "parse_scene_document",
    "write_scene_document",
    "ProceduralSceneSpec",
    "generate_procedural_scene",
    "occlusion_preset",
    "procedural_document",
    "ShadingBatch",
    "ShadingQuery",
    "Hit",
    "HitBatch",
    "Scene",
    "Spectrum",
    "luminance",
]
