"""High-spp uniform-strategy reference renders, cached on disk by scene hash."""

from pathlib import Path

import numpy as np

from app.settings import get_settings
from integrator.config import RenderConfig, Strategy
from integrator.images import read_pfm, write_pfm
from integrator.render import render
from scene.scene import Scene
from utils.logging import get_logger

logger = get_logger(__name__)

REFERENCE_SPP = 65536
# kept apart from the small seeds used by the renders being measured
REFERENCE_SEED = 1_000_003


def reference_config(config: RenderConfig, spp: int = REFERENCE_SPP) -> RenderConfig:
    """The uniform-strategy counterpart of ``config`` at ``spp`` samples: no time budget, fixed seed."""
    return config.model_copy(
        update={
            "strategy": Strategy.UNIFORM,
            "spp": spp,
            "time_budget": None,
            "discard_training_waves": False,
            "seed": REFERENCE_SEED,
        }
    )


def reference_path(scene: Scene, config: RenderConfig, cache_dir: Path) -> Path:
    crop = config.crop
    window = f"_{crop.x}-{crop.y}-{crop.width}-{crop.height}" if crop else ""
    name = f"{scene.content_hash[:16]}_{config.width}x{config.height}{window}_{config.spp}spp.pfm"
    return cache_dir / "references" / name


def load_or_render_reference(
    scene: Scene,
    config: RenderConfig,
    spp: int = REFERENCE_SPP,
    cache_dir: str | Path | None = None,
    progress: bool = False,
) -> np.ndarray:
    """
    Reference image for ``config``'s resolution and crop.

    Looks up ``<cache_dir>/references/`` first and renders (then caches) a
    ``spp``-sample uniform render on a miss. ``cache_dir`` defaults to the
    ``LUMISEL_CACHE_DIR`` setting.
    """
    ref_config = reference_config(config, spp)
    cache = Path(cache_dir) if cache_dir is not None else get_settings().cache_dir
    path = reference_path(scene, ref_config, cache)
    if path.exists():
        logger.info("Using cached reference '%s'.", path)
        return read_pfm(path).astype(np.float64)
    logger.info("No cached reference for scene %s; rendering %d spp.", scene.content_hash[:16], spp)
    image = render(scene, ref_config, progress=progress).image
    write_pfm(path, image)
    return read_pfm(path).astype(np.float64)
