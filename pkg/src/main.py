import argparse
import sys

from commands import ABLATION_AXES, cmd_ablate, cmd_compare, cmd_gen_scene, cmd_render
from commands.compare import DEFAULT_STRATEGIES
from encoding.features import InputMode
from integrator.config import DEFAULT_CLUSTER_LEVEL, DEFAULT_TRAIN_RATIO, Strategy
from integrator.reference import REFERENCE_SPP
from lighttree.importance import ImportanceMode
from neural.training import DEFAULT_BATCH_SIZE, DEFAULT_LEARNING_RATE
from utils.logging import configure_logging, get_logger, verbosity_level

logger = get_logger(__name__)

PRESETS = ["desk", "occlusion"]
BUDGETS = ["spp", "time", "both"]
LIGHT_KINDS = ["quad", "triangle", "point"]


def _add_scene_flags(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--scene", help="Scene JSON document")
    source.add_argument("--preset", choices=PRESETS, help="Procedural scene instead of --scene")
    parser.add_argument("--scene-seed", type=int, default=0, help="Seed of the --preset scene. Default: 0")
    parser.add_argument(
        "--lenient",
        action="store_true",
        help="Ignore unknown scene-file fields with a warning instead of rejecting the scene",
    )


def _add_render_flags(parser: argparse.ArgumentParser, with_strategy: bool = True) -> None:
    _add_scene_flags(parser)
    parser.add_argument("--width", type=int, default=256)
    parser.add_argument("--height", type=int, default=256)
    parser.add_argument("--spp", type=int, default=128, help="Samples per pixel. Default: 128")
    if with_strategy:
        parser.add_argument(
            "--strategy",
            choices=[s.value for s in Strategy],
            default=Strategy.NEURAL_RESIDUAL.value,
            help="Light selection strategy. Default: neural-residual",
        )
    parser.add_argument("--time-budget", type=float, default=None, help="Seconds of rendering; --spp becomes a cap")
    parser.add_argument(
        "--train-ratio",
        type=float,
        default=DEFAULT_TRAIN_RATIO,
        help=f"Share of the budget spent training. Default: {DEFAULT_TRAIN_RATIO}",
    )
    parser.add_argument(
        "--cluster-level",
        type=int,
        default=DEFAULT_CLUSTER_LEVEL,
        help=f"Light tree depth of the cluster cut. Default: {DEFAULT_CLUSTER_LEVEL}",
    )
    parser.add_argument("--lr", type=float, default=DEFAULT_LEARNING_RATE, help="Adam learning rate")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="out", help="Output directory. Default: out")
    parser.add_argument("--reference", default=None, help="Reference PFM path, or 'auto' for a cached uniform render")
    parser.add_argument(
        "--reference-spp",
        type=int,
        default=REFERENCE_SPP,
        help=f"Samples per pixel of an 'auto' reference. Default: {REFERENCE_SPP}",
    )
    parser.add_argument(
        "--importance",
        choices=[m.value for m in ImportanceMode],
        default=ImportanceMode.GEO_COS.value,
        help="Light tree node importance. Default: geo-cos",
    )
    parser.add_argument("--no-weight-clamp", action="store_true", help="Disable the training weight clamp")
    parser.add_argument(
        "--discard-training-waves",
        action="store_true",
        help="Leave the samples of training waves out of the image",
    )
    parser.add_argument(
        "--input-mode",
        choices=[m.value for m in InputMode],
        default=InputMode.CONTINUOUS.value,
    )
    parser.add_argument("--batch-size", type=int, default=DEFAULT_BATCH_SIZE)
    parser.add_argument("--threads", type=int, default=None, help="Worker threads. Default: LUMISEL_THREADS or CPU count")
    parser.add_argument("--crop", default=None, help="Render only x,y,width,height of the image")


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(prog="lumisel", description="Neural many-light direct lighting renderer")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    verbosity.add_argument("--quiet", "-q", action="store_true", help="Warnings only, no progress bars")
    sub = parser.add_subparsers(dest="command", required=True)

    render = sub.add_parser("render", help="Render one image")
    _add_render_flags(render)
    render.add_argument("--save-checkpoint", default=None, help="Write the trained network here")
    render.add_argument("--load-checkpoint", default=None, help="Start from this network checkpoint")
    render.add_argument("--dump-light-tree", default=None, help="Write the light tree and cut as JSON")
    render.set_defaults(handler=cmd_render)

    compare = sub.add_parser("compare", help="Compare strategies under equal spp and/or equal time")
    _add_render_flags(compare, with_strategy=False)
    compare.add_argument(
        "--strategies",
        default=DEFAULT_STRATEGIES,
        help=f"Comma-separated strategies. Default: {DEFAULT_STRATEGIES}",
    )
    compare.add_argument("--budget", choices=BUDGETS, default="spp", help="Default: spp")
    compare.add_argument("--max-spp", type=int, default=1_000_000, help="spp cap of equal-time runs")
    compare.add_argument("--repeats", type=int, default=1, help="Seeds per strategy; rows report medians")
    compare.set_defaults(handler=cmd_compare)

    ablate = sub.add_parser("ablate", help="Sweep one design axis of the neural strategy")
    _add_render_flags(ablate, with_strategy=False)
    # not restricted by choices so an unknown axis reports through the JSON error path
    ablate.add_argument("--axis", required=True, help=f"One of: {', '.join(ABLATION_AXES)}")
    ablate.add_argument("--repeats", type=int, default=1)
    ablate.set_defaults(handler=cmd_ablate)

    gen = sub.add_parser("gen-scene", help="Write a procedural scene document")
    gen.add_argument("--preset", choices=PRESETS, default="occlusion", help="Default: occlusion")
    gen.add_argument("--lights-x", type=int, default=None)
    gen.add_argument("--lights-z", type=int, default=None)
    gen.add_argument("--walls", type=int, default=None)
    gen.add_argument("--light-kind", choices=LIGHT_KINDS, default=None)
    gen.add_argument("--light-size", type=float, default=None)
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--out", required=True, help="Scene JSON path")
    gen.set_defaults(handler=cmd_gen_scene)

    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    args = parse_args(argv)
    configure_logging(verbosity_level(args.verbose, args.quiet))
    logger.debug("Running '%s'.", args.command)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
