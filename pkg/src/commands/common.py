"""Helpers shared by every sub-command: scene resolution, config mapping, error reporting."""

import argparse
import hashlib
import sys
from functools import lru_cache
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import ValidationError

from commands.models.error_response import ErrorResponse
from integrator.config import Crop, RenderConfig
from integrator.images import read_pfm
from integrator.reference import load_or_render_reference
from scene.loader import load_scene
from scene.procedural import ProceduralSceneSpec, generate_procedural_scene, occlusion_preset
from scene.scene import Scene
from utils.errors import ConfigurationError, LumiselError
from utils.logging import get_logger

logger = get_logger(__name__)

_SOURCE_ROOT = Path(__file__).resolve().parent.parent


@lru_cache(maxsize=1)
def build_id() -> str:
    """SHA-1 over every source file (path and contents), a git-style id of this build."""
    digest = hashlib.sha1()
    for path in sorted(_SOURCE_ROOT.rglob("*.py")):
        digest.update(path.relative_to(_SOURCE_ROOT).as_posix().encode("utf-8"))
        digest.update(b"\0")
        digest.update(path.read_bytes())
    return digest.hexdigest()


def parsed_flags(args: argparse.Namespace) -> dict[str, Any]:
    """Every parsed flag except the dispatch handler, for the run manifest."""
    return {name: value for name, value in sorted(vars(args).items()) if name != "handler"}


def scene_label(args: argparse.Namespace) -> str:
    return str(args.scene) if getattr(args, "scene", None) else f"preset:{args.preset}"


def resolve_scene(args: argparse.Namespace) -> Scene:
    """Load ``--scene`` or generate ``--preset``."""
    if getattr(args, "scene", None):
        return load_scene(args.scene, lenient=args.lenient)
    if args.preset == "occlusion":
        spec = occlusion_preset(seed=args.scene_seed)
    elif args.preset == "desk":
        spec = ProceduralSceneSpec(preset="desk", seed=args.scene_seed)
    else:
        raise ConfigurationError("either --scene or --preset is required")
    return generate_procedural_scene(spec)


def parse_crop(text: str | None) -> Crop | None:
    if not text:
        return None
    try:
        x, y, width, height = (int(part) for part in text.split(","))
        return Crop(x=x, y=y, width=width, height=height)
    except ValueError:
        # pydantic's ValidationError is a ValueError too
        raise ConfigurationError(f"--crop expects x,y,width,height, got '{text}'", flag="--crop")


def config_from_args(args: argparse.Namespace, **overrides: Any) -> RenderConfig:
    """
    Map the shared render flags onto a validated `RenderConfig`.

    Raises:
        ConfigurationError: A flag value is out of range.
    """
    values: dict[str, Any] = {
        "width": args.width,
        "height": args.height,
        "spp": args.spp,
        "strategy": getattr(args, "strategy", "neural-residual"),
        "train_budget_ratio": args.train_ratio,
        "cluster_level": args.cluster_level,
        "lr": args.lr,
        "seed": args.seed,
        "time_budget": args.time_budget,
        "importance": args.importance,
        "weight_clamp": not args.no_weight_clamp,
        "discard_training_waves": args.discard_training_waves,
        "input_mode": args.input_mode,
        "batch_size": args.batch_size,
        "threads": args.threads,
        "crop": parse_crop(args.crop),
    }
    values.update(overrides)
    try:
        return RenderConfig.model_validate(values)
    except ValidationError as exc:
        first = exc.errors()[0]
        field = ".".join(str(part) for part in first["loc"])
        raise ConfigurationError(f"invalid configuration: {first['msg']}", field=field or None)


def resolve_reference(args: argparse.Namespace, scene: Scene, config: RenderConfig) -> np.ndarray | None:
    """``--reference`` is a PFM path, ``auto`` (cached uniform render) or absent."""
    if not args.reference:
        return None
    if args.reference == "auto":
        return load_or_render_reference(scene, config, spp=args.reference_spp, progress=not args.quiet)
    image = read_pfm(args.reference).astype(np.float64)
    expected = (config.image_height, config.image_width, 3)
    if image.shape != expected:
        raise ConfigurationError(
            f"reference is {image.shape[1]}x{image.shape[0]}, render is {expected[1]}x{expected[0]}",
            reference=args.reference,
        )
    return image


def report_error(exc: Exception, **context: Any) -> int:
    """Log ``exc``, print its `ErrorResponse` as JSON on stderr and return the exit code."""
    if isinstance(exc, LumiselError):
        context = {**context, **exc.context}
        code = exc.exit_code
        message = exc.message
    else:
        code = 1
        message = str(exc)
    err = ErrorResponse(
        error=message,
        detail=repr(exc),
        context={k: v for k, v in context.items() if v is not None} or None,
    )
    print(err.model_dump_json(), file=sys.stderr)
    return code
