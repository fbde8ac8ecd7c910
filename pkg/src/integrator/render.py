"""The wave loop: render one sample per pixel, train on its records, publish, repeat.

Within a wave, tiles render in parallel against read-only state: the scene, the
light tree and cut, and an immutable network snapshot. Records from every tile
are concatenated in tile order and handed to the single trainer only after the
wave has finished, then a fresh snapshot is published for the next wave.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel
from tqdm import tqdm

from app.settings import get_settings
from integrator.config import TILE_SIZE, RenderConfig, Strategy
from integrator.estimator import UNIFORMS_PER_SAMPLE, estimate_direct_batch, trace_primary_batch
from integrator.metrics import compute_metrics
from integrator.selection import (
    LightSelector,
    NeuralSelector,
    PowerSelector,
    TreeSelector,
    UniformSelector,
)
from lighttree.cut import ClusterCut, select_cut
from lighttree.tree import LightTree, build_tree
from neural.network import NetworkState, init_network
from neural.training import OnlineTrainer, TrainingBatch
from scene.scene import Scene
from utils.errors import ConfigurationError
from utils.logging import get_logger, progress_enabled

logger = get_logger(__name__)


class WaveStats(BaseModel):
    wave: int
    spp: int
    seconds: float
    mse: float | None = None
    relmse: float | None = None
    strategy: str
    training: bool = False


@dataclass
class RenderOutput:
    image: np.ndarray  # (H, W, 3) mean estimate
    stats: list[WaveStats]
    spp: int  # samples per pixel averaged into the image
    waves: int  # waves rendered, including discarded ones
    training_waves: int
    render_seconds: float
    setup_seconds: float  # light tree build, cut selection, network init
    tree: LightTree | None = None
    cut: ClusterCut | None = None
    state: NetworkState | None = None
    losses: list[float] = field(default_factory=list)


@dataclass(frozen=True)
class Tile:
    index: int
    x: int  # full-image pixel coordinates of the top-left corner
    y: int
    width: int
    height: int
    out_x: int  # position inside the output image
    out_y: int


def make_tiles(config: RenderConfig, tile_size: int = TILE_SIZE) -> list[Tile]:
    """Fixed row-major tiling of the output window; independent of the worker count."""
    x0, y0 = (config.crop.x, config.crop.y) if config.crop else (0, 0)
    width, height = config.image_width, config.image_height
    tiles = []
    for ty in range(0, height, tile_size):
        for tx in range(0, width, tile_size):
            tiles.append(
                Tile(
                    index=len(tiles),
                    x=x0 + tx,
                    y=y0 + ty,
                    width=min(tile_size, width - tx),
                    height=min(tile_size, height - ty),
                    out_x=tx,
                    out_y=ty,
                )
            )
    return tiles


class Renderer:
    """
    Owns everything a render needs and runs the wave loop.

    Arguments:
        scene (Scene): The scene to render.
        config (RenderConfig): Validated configuration.
        state (NetworkState, optional): Network to continue training (e.g. from a
            checkpoint); a fresh one is initialised for neural strategies otherwise.
        progress (bool, optional): Show a progress bar on a terminal.

    Raises:
        ConfigurationError: The supplied network does not fit the scene's cut or config.
    """

    def __init__(
        self,
        scene: Scene,
        config: RenderConfig,
        state: NetworkState | None = None,
        progress: bool = False,
    ):
        self.scene = scene
        self.config = config
        self.progress = progress
        self.workers = get_settings().worker_count(config.threads)
        self.tiles = make_tiles(config)

        start = time.perf_counter()
        self.tree: LightTree | None = None
        self.cut: ClusterCut | None = None
        self.trainer: OnlineTrainer | None = None
        if config.strategy.needs_tree:
            self.tree = build_tree(scene.light_table)
        if config.strategy.is_neural:
            self.cut = select_cut(self.tree, config.cluster_level, config.importance)
            if state is None:
                state = init_network(
                    self.cut.size,
                    scene.bounds_min,
                    scene.bounds_max,
                    seed=config.seed,
                    input_mode=config.input_mode,
                )
            elif state.cluster_count != self.cut.size:
                raise ConfigurationError(
                    f"network predicts {state.cluster_count} clusters but the cut has {self.cut.size}",
                    cluster_level=config.cluster_level,
                )
            elif state.input_mode != config.input_mode:
                raise ConfigurationError(
                    f"network was trained with {state.input_mode} inputs, config asks for {config.input_mode}"
                )
            self.trainer = OnlineTrainer(state, config.lr, config.batch_size, config.weight_clamp)
        elif state is not None:
            raise ConfigurationError(f"strategy '{config.strategy}' does not use a network")
        self.setup_seconds = time.perf_counter() - start

    def _selector(self, snapshot: NetworkState | None) -> LightSelector:
        strategy = self.config.strategy
        if strategy == Strategy.UNIFORM:
            return UniformSelector(self.scene.light_count)
        if strategy == Strategy.POWER:
            return PowerSelector(self.scene.light_table)
        if strategy == Strategy.TREE_BASELINE:
            return TreeSelector(self.tree, self.config.importance)
        return NeuralSelector(self.cut, snapshot, residual=strategy == Strategy.NEURAL_RESIDUAL)

    def _render_tile(
        self, tile: Tile, wave: int, selector: LightSelector, collect: bool
    ) -> tuple[np.ndarray, TrainingBatch | None]:
        rng = np.random.default_rng(np.random.SeedSequence([self.config.seed, wave, tile.index]))
        u = rng.random((tile.width * tile.height, UNIFORMS_PER_SAMPLE))
        py, px = np.mgrid[tile.y : tile.y + tile.height, tile.x : tile.x + tile.width]
        origins, dirs = self.scene.camera.generate_rays(
            px.reshape(-1).astype(np.float64),
            py.reshape(-1).astype(np.float64),
            u[:, :2],
            self.config.width,
            self.config.height,
        )
        primary = trace_primary_batch(self.scene, origins, dirs)
        radiance = primary.emitted
        estimate, records = estimate_direct_batch(
            self.scene, primary.queries, selector, u[primary.pixel_index, 2:], collect
        )
        if len(primary.pixel_index):
            radiance[primary.pixel_index] += primary.throughput * estimate
        return radiance.reshape(tile.height, tile.width, 3), records

    def _render_wave(
        self, executor: ThreadPoolExecutor, wave: int, selector: LightSelector, collect: bool
    ) -> tuple[np.ndarray, TrainingBatch | None]:
        image = np.zeros((self.config.image_height, self.config.image_width, 3))
        batches = []
        results = executor.map(lambda t: self._render_tile(t, wave, selector, collect), self.tiles)
        for tile, (radiance, records) in zip(self.tiles, results, strict=True):
            image[tile.out_y : tile.out_y + tile.height, tile.out_x : tile.out_x + tile.width] = radiance
            if records is not None and len(records):
                batches.append(records)
        return image, TrainingBatch.concatenate(batches) if batches else None

    def render(self, reference: np.ndarray | None = None) -> RenderOutput:
        """
        Run waves until ``spp`` is reached or the time budget has passed.

        Training waves are the first ⌈ratio · spp⌉ waves, or with a time budget
        every wave that starts before ``ratio · time_budget`` seconds. Their
        samples are averaged into the image unless ``discard_training_waves``.
        """
        config = self.config
        snapshot = self.trainer.snapshot() if self.trainer else None
        total = np.zeros((config.image_height, config.image_width, 3))
        kept = np.zeros_like(total)
        kept_waves = 0
        training_waves = 0
        stats: list[WaveStats] = []

        logger.info(
            "Rendering %dx%d, strategy %s, up to %d spp with %d worker(s).",
            config.image_width,
            config.image_height,
            config.strategy,
            config.spp,
            self.workers,
        )
        bar = tqdm(
            total=config.spp,
            unit="spp",
            desc=str(config.strategy),
            disable=not progress_enabled(self.progress),
            leave=False,
        )
        start = time.perf_counter()
        wave = 0
        with ThreadPoolExecutor(max_workers=self.workers) as executor, bar:
            while wave < config.spp:
                elapsed = time.perf_counter() - start
                if config.time_budget is not None:
                    training = self.trainer is not None and elapsed < config.train_budget_ratio * config.time_budget
                else:
                    training = wave < config.training_waves
                selector = self._selector(snapshot)
                image, records = self._render_wave(executor, wave, selector, collect=training)
                total += image
                if not (training and config.discard_training_waves):
                    kept += image
                    kept_waves += 1
                if training:
                    training_waves += 1
                    if records is not None:
                        self.trainer.train(records)
                    snapshot = self.trainer.snapshot()
                wave += 1
                elapsed = time.perf_counter() - start

                row = WaveStats(
                    wave=wave - 1,
                    spp=kept_waves,
                    seconds=elapsed,
                    strategy=str(config.strategy),
                    training=training,
                )
                if reference is not None and kept_waves:
                    metrics = compute_metrics(kept / kept_waves, reference)
                    row.mse, row.relmse = metrics.mse, metrics.relmse
                stats.append(row)
                logger.debug(
                    "Wave %d done at %.3fs (training=%s, relMSE=%s).", row.wave, elapsed, training, row.relmse
                )
                bar.update(1)
                if config.time_budget is not None and elapsed >= config.time_budget:
                    break

        render_seconds = time.perf_counter() - start
        if kept_waves:
            image = kept / kept_waves
        else:
            logger.warning("Every wave was a training wave; keeping them in the image.")
            image, kept_waves = total / wave, wave
        logger.info(
            "Rendered %d wave(s) (%d training, %d in image) in %.2fs.",
            wave,
            training_waves,
            kept_waves,
            render_seconds,
        )
        return RenderOutput(
            image=image,
            stats=stats,
            spp=kept_waves,
            waves=wave,
            training_waves=training_waves,
            render_seconds=render_seconds,
            setup_seconds=self.setup_seconds,
            tree=self.tree,
            cut=self.cut,
            state=self.trainer.state if self.trainer else None,
            losses=list(self.trainer.losses) if self.trainer else [],
        )


def render(
    scene: Scene,
    config: RenderConfig,
    reference: np.ndarray | None = None,
    state: NetworkState | None = None,
    progress: bool = False,
) -> RenderOutput:
    """
    Render ``scene`` with ``config``.

    The image is deterministic for a fixed seed: every tile draws from its own
    generator seeded by (seed, wave, tile) and the tiling does not depend on the
    number of workers.

    Arguments:
        scene (Scene): The scene.
        config (RenderConfig): Render settings.
        reference (np.ndarray, optional): (H, W, 3) image for per-wave MSE/relMSE.
        state (NetworkState, optional): Network to start from.
        progress (bool, optional): Show a progress bar.

    Returns:
        RenderOutput: Image, per-wave statistics and the trained network, if any.

    Raises:
        ConfigurationError: Inconsistent network/config combination.
    """
    return Renderer(scene, config, state=state, progress=progress).render(reference)
