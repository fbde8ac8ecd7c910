import argparse
import time
from datetime import UTC, datetime
from pathlib import Path

from pydantic import ValidationError

from commands.common import build_id, parsed_flags, report_error
from commands.models.manifest import RunManifest, write_manifest
from scene.document import build_scene
from scene.loader import write_scene_document
from scene.procedural import ProceduralSceneSpec, occlusion_preset, procedural_document
from utils.errors import ConfigurationError
from utils.logging import get_logger

logger = get_logger(__name__)


def spec_from_args(args: argparse.Namespace) -> ProceduralSceneSpec:
    values = {
        "preset": args.preset,
        "lights_x": args.lights_x,
        "lights_z": args.lights_z,
        "walls": args.walls,
        "light_kind": args.light_kind,
        "light_size": args.light_size,
        "seed": args.seed,
    }
    # unset flags fall back to the preset's own defaults
    base = occlusion_preset().model_dump() if args.preset == "occlusion" else {}
    try:
        return ProceduralSceneSpec.model_validate(base | {k: v for k, v in values.items() if v is not None})
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ConfigurationError(f"invalid scene spec: {first['msg']}", field=".".join(map(str, first["loc"])))


def cmd_gen_scene(args: argparse.Namespace) -> int:
    """
    Write a procedural scene document and its manifest.

    Arguments:
        args (argparse.Namespace): Parsed ``gen-scene`` flags.

    Returns:
        int: 0 on success, 2 for an invalid spec, 1 otherwise.

    Example:
        lumisel gen-scene --preset occlusion --lights-x 32 --lights-z 16 --out scenes/occlusion.json

    Notes:
        - The same flags and seed always produce the same file.
        - The manifest lands next to the scene as ``manifest.json``.
    """
    started_at = datetime.now(UTC)
    start = time.perf_counter()
    out = Path(args.out)

    try:
        spec = spec_from_args(args)
        document = procedural_document(spec)
        scene = build_scene(document)
        path = write_scene_document(document, out)
        manifest = RunManifest(
            command="gen-scene",
            flags=parsed_flags(args),
            config=spec.model_dump(mode="json"),
            scene=str(path),
            scene_hash=scene.content_hash,
            build_id=build_id(),
            seed=spec.seed,
            started_at=started_at,
            wall_clock_seconds=time.perf_counter() - start,
            outputs={"scene": str(path)},
        )
        write_manifest(manifest, out.parent)
    except Exception as exc:
        logger.exception("Scene generation failed.")
        return report_error(exc, out=str(out))
    else:
        logger.info("Generated %s scene with %d lights at '%s'.", spec.preset, scene.light_count, path)
        return 0
