import argparse
import time
from datetime import UTC, datetime
from pathlib import Path

from commands.common import (
    build_id,
    config_from_args,
    parsed_flags,
    report_error,
    resolve_reference,
    resolve_scene,
    scene_label,
)
from commands.models.manifest import RunManifest, write_manifest
from integrator.images import STATS_SCHEMA_VERSION, write_pfm, write_ppm, write_stats_csv
from integrator.render import render
from lighttree.dump import dump_light_tree
from lighttree.tree import build_tree
from neural.checkpoint import checkpoint_load, checkpoint_save
from utils.logging import get_logger

logger = get_logger(__name__)


def cmd_render(args: argparse.Namespace) -> int:
    """
    Render one scene with one strategy and write its artefacts.

    Arguments:
        args (argparse.Namespace): Parsed ``render`` flags.

    Returns:
        int: 0 on success, 2 for configuration or scene errors, 1 otherwise.

    Example:
        lumisel render --preset occlusion --strategy neural-residual --spp 128 --out out/occl

    Notes:
        - Writes ``image.pfm``, ``image.ppm``, ``stats.csv`` and ``manifest.json``
          into ``--out``, plus the optional checkpoint and light-tree dump.
        - ``render_seconds`` in the manifest covers first ray to last wave only.
    """
    started_at = datetime.now(UTC)
    start = time.perf_counter()
    out = Path(args.out)
    logger.info("Render of '%s' into '%s'.", scene_label(args), out)

    try:
        scene = resolve_scene(args)
        config = config_from_args(args)
        state = checkpoint_load(args.load_checkpoint) if args.load_checkpoint else None
        reference = resolve_reference(args, scene, config)
        result = render(scene, config, reference=reference, state=state, progress=not args.quiet)

        outputs = {
            "image_pfm": str(write_pfm(out / "image.pfm", result.image)),
            "image_ppm": str(write_ppm(out / "image.ppm", result.image)),
            "stats_csv": str(write_stats_csv(out / "stats.csv", [s.model_dump() for s in result.stats])),
        }
        if args.save_checkpoint and result.state is not None:
            outputs["checkpoint"] = str(checkpoint_save(result.state, args.save_checkpoint))
        if args.dump_light_tree:
            tree = result.tree if result.tree is not None else build_tree(scene.light_table)
            outputs["light_tree"] = str(dump_light_tree(tree, args.dump_light_tree, result.cut))
        manifest = RunManifest(
            command="render",
            flags=parsed_flags(args),
            config=config.model_dump(mode="json"),
            scene=scene_label(args),
            scene_hash=scene.content_hash,
            build_id=build_id(),
            seed=config.seed,
            started_at=started_at,
            wall_clock_seconds=time.perf_counter() - start,
            render_seconds=result.render_seconds,
            setup_seconds=result.setup_seconds,
            stats_schema_version=STATS_SCHEMA_VERSION,
            outputs=outputs,
        )
        write_manifest(manifest, out)
    except Exception as exc:
        logger.exception("Render of '%s' failed.", scene_label(args))
        return report_error(exc, scene=scene_label(args), out=str(out))
    else:
        logger.info(
            "Render finished: %d spp in %.2fs, outputs in '%s'.", result.spp, result.render_seconds, out
        )
        return 0
