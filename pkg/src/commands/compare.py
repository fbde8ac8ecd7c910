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
from commands.matrix import Variant, run_variants
from commands.models.manifest import RunManifest, write_manifest
from integrator.config import Strategy
from integrator.images import STATS_SCHEMA_VERSION, write_csv
from utils.errors import ConfigurationError
from utils.logging import get_logger

logger = get_logger(__name__)

COMPARE_COLUMNS = ("budget", "strategy", "seeds", "spp", "seconds", "mse", "relmse")
DEFAULT_STRATEGIES = "uniform,power,tree-baseline,neural-residual"


def parse_strategies(text: str) -> list[Strategy]:
    try:
        strategies = [Strategy(name.strip()) for name in text.split(",") if name.strip()]
    except ValueError:
        raise ConfigurationError(
            f"unknown strategy in '{text}'", choices=[s.value for s in Strategy], flag="--strategies"
        )
    if not strategies:
        raise ConfigurationError("--strategies is empty", flag="--strategies")
    return strategies


def cmd_compare(args: argparse.Namespace) -> int:
    """
    Run a strategy matrix under equal-sample and/or equal-time budgets.

    Arguments:
        args (argparse.Namespace): Parsed ``compare`` flags.

    Returns:
        int: 0 on success, 2 for configuration or scene errors, 1 otherwise.

    Example:
        lumisel compare --preset occlusion --spp 128 --reference auto --repeats 5 --out out/cmp
        lumisel compare --preset occlusion --budget time --time-budget 5 --out out/cmp-time

    Notes:
        - ``compare.csv`` has one row per (budget, strategy) with medians over
          ``--repeats`` seeds; equal-time rows report the spp achieved.
        - Per-wave convergence CSVs go to ``<out>/convergence/``.
    """
    started_at = datetime.now(UTC)
    start = time.perf_counter()
    out = Path(args.out)

    try:
        strategies = parse_strategies(args.strategies)
        budgets = ["spp", "time"] if args.budget == "both" else [args.budget]
        if "time" in budgets and args.time_budget is None:
            raise ConfigurationError("equal-time comparison needs --time-budget", flag="--time-budget")
        scene = resolve_scene(args)
        base = config_from_args(args, time_budget=None)
        reference = resolve_reference(args, scene, base)

        variants = []
        for budget in budgets:
            for strategy in strategies:
                overrides = {"strategy": strategy}
                if budget == "time":
                    overrides |= {"time_budget": args.time_budget, "spp": args.max_spp}
                else:
                    overrides |= {"time_budget": None}
                configs = [
                    config_from_args(args, seed=args.seed + r, **overrides) for r in range(args.repeats)
                ]
                variants.append(Variant(label={"budget": budget, "strategy": str(strategy)}, configs=configs))

        rows, outputs, setup_seconds = run_variants(
            scene, variants, reference, out / "convergence", progress=not args.quiet
        )
        outputs["compare_csv"] = str(write_csv(out / "compare.csv", COMPARE_COLUMNS, rows))
        manifest = RunManifest(
            command="compare",
            flags=parsed_flags(args),
            config={
                **base.model_dump(mode="json"),
                "strategies": [str(s) for s in strategies],
                "budgets": budgets,
                "time_budget": args.time_budget,
                "max_spp": args.max_spp,
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
        logger.exception("Comparison on '%s' failed.", scene_label(args))
        return report_error(exc, scene=scene_label(args), out=str(out))
    else:
        logger.info("Comparison finished: %d rows in '%s'.", len(rows), out / "compare.csv")
        return 0
