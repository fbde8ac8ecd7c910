"""Running a list of render configurations and summarising them per variant."""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from integrator.config import RenderConfig
from integrator.images import write_stats_csv
from integrator.render import render
from scene.scene import Scene
from utils.logging import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class Variant:
    """One row of a comparison: a label and the configs of its repeated seeds."""

    label: dict[str, str]
    configs: list[RenderConfig]


def run_variants(
    scene: Scene,
    variants: list[Variant],
    reference: np.ndarray | None,
    convergence_dir: Path,
    progress: bool = False,
) -> tuple[list[dict], dict[str, str], float]:
    """
    Render every config of every variant.

    Each render's per-wave stats go to ``convergence_dir/<label>_seed<seed>.csv``.
    The summary row of a variant holds the medians over its seeds of achieved spp,
    render seconds, MSE and relMSE.

    Returns:
        tuple[list[dict], dict[str, str], float]: Summary rows, written paths and
        the total setup seconds (tree build and network init) across renders.
    """
    rows = []
    outputs: dict[str, str] = {}
    setup_seconds = 0.0
    for variant in variants:
        spp, seconds, mse, relmse = [], [], [], []
        stem = "_".join(v.replace("/", "-") for v in variant.label.values())
        for config in variant.configs:
            result = render(scene, config, reference=reference, progress=progress)
            setup_seconds += result.setup_seconds
            name = f"{stem}_seed{config.seed}"
            path = write_stats_csv(convergence_dir / f"{name}.csv", [s.model_dump() for s in result.stats])
            outputs[f"convergence:{name}"] = str(path)
            spp.append(result.spp)
            seconds.append(result.render_seconds)
            last = result.stats[-1] if result.stats else None
            if last is not None and last.relmse is not None:
                mse.append(last.mse)
                relmse.append(last.relmse)
        row = {
            **variant.label,
            "seeds": len(variant.configs),
            "spp": float(np.median(spp)),
            "seconds": float(np.median(seconds)),
            "mse": float(np.median(mse)) if mse else None,
            "relmse": float(np.median(relmse)) if relmse else None,
        }
        logger.info("Variant %s: spp %.0f, relMSE %s.", variant.label, row["spp"], row["relmse"])
        rows.append(row)
    return rows, outputs, setup_seconds
