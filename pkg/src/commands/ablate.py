import argparse
import time
from datetime import UTC, datetime
from pathlib import Path
from typing import Any

from commands.common import (
    build_id,
    config_from_args,
    parsed_flags,
    report_error,
    resolve_reference,
    resolve_scene,
    scene_label,
)
from commands.matrix import Variant, run_variants
from commands.models.manifest import RunManifest, write_manifest
from integrator.images import STATS_SCHEMA_VERSION, write_csv
from utils.errors import UnknownAblationAxisError
from utils.logging import get_logger

logger = get_logger(__name__)

ABLATE_COLUMNS = ("axis", "value", "seeds", "spp", "seconds", "mse", "relmse")

# axis name -> list of (value label, RenderConfig overrides)
ABLATION_AXES: dict[str, list[tuple[str, dict[str, Any]]]] = {
    "residual": [
        ("residual", {"strategy": "neural-residual"}),
        ("direct", {"strategy": "neural-direct"}),
    ],
    "cluster-level": [(str(k), {"cluster_level": k}) for k in (4, 6, 8)],
    "input": [
        ("continuous", {"input_mode": "continuous"}),
        ("discrete", {"input_mode": "discrete"}),
    ],
    "train-ratio": [(str(r), {"train_budget_ratio": r}) for r in (0.0, 0.05, 0.15, 0.3, 0.5)],
    "lr": [(str(lr), {"lr": lr}) for lr in (3e-2, 3e-3)],
}


def ablation_variants(axis: str, args: argparse.Namespace) -> list[Variant]:
    """
    Raises:
        UnknownAblationAxisError: ``axis`` is not one of `ABLATION_AXES`.
    """
    if axis not in ABLATION_AXES:
        raise UnknownAblationAxisError(
            f"unknown ablation axis '{axis}'", axis=axis, choices=sorted(ABLATION_AXES)
        )
    variants = []
    for value, overrides in ABLATION_AXES[axis]:
        overrides = {"strategy": "neural-residual", **overrides}
        configs = [config_from_args(args, seed=args.seed + r, **overrides) for r in range(args.repeats)]
        variants.append(Variant(label={"axis": axis, "value": value}, configs=configs))
    return variants


def cmd_ablate(args: argparse.Namespace) -> int:
    """
    Sweep exactly one design axis of the neural strategy, everything else fixed.

    Arguments:
        args (argparse.Namespace): Parsed ``ablate`` flags; ``--axis`` is one of
            ``residual``, ``cluster-level``, ``input``, ``train-ratio``, ``lr``.

    Returns:
        int: 0 on success, 2 for an unknown axis, configuration or scene errors, 1 otherwise.

    Example:
        lumisel ablate --preset occlusion --axis cluster-level --spp 128 --reference auto --out out/k

    Notes:
        - ``input=discrete`` snaps positions to 32³ cell centres and directions to
          8 buckets per component before encoding.
        - Writes ``ablation.csv`` (medians over ``--repeats`` seeds) and per-wave
          convergence CSVs.
    """
    started_at = datetime.now(UTC)
    start = time.perf_counter()
    out = Path(args.out)

    try:
        variants = ablation_variants(args.axis, args)
        scene = resolve_scene(args)
        reference = resolve_reference(args, scene, variants[0].configs[0])
        rows, outputs, setup_seconds = run_variants(
            scene, variants, reference, out / "convergence", progress=not args.quiet
        )
        outputs["ablation_csv"] = str(write_csv(out / "ablation.csv", ABLATE_COLUMNS, rows))
        manifest = RunManifest(
            command="ablate",
            flags=parsed_flags(args),
            config={
                **variants[0].configs[0].model_dump(mode="json"),
                "axis": args.axis,
                "values": [v.label["value"] for v in variants],
                "repeats": args.repeats,
            },
            scene=scene_label(args),
            scene_hash=scene.content_hash,
            build_id=build_id(),
            seed=args.seed,
            started_at=started_at,
            wall_clock_seconds=time.perf_counter() - start,
            setup_seconds=setup_seconds,
            stats_schema_version=STATS_SCHEMA_VERSION,
            outputs=outputs,
        )
        write_manifest(manifest, out)
    except Exception as exc:
        logger.exception("Ablation of '%s' failed.", args.axis)
        return report_error(exc, axis=args.axis, scene=scene_label(args), out=str(out))
    else:
        logger.info("Ablation of '%s' finished: %d variants.", args.axis, len(rows))
        return 0
