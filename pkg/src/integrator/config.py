"""Render configuration."""

import math
from enum import StrEnum

from pydantic import BaseModel, ConfigDict, Field, model_validator

from encoding.features import InputMode
from lighttree.importance import ImportanceMode
from neural.training import DEFAULT_BATCH_SIZE, DEFAULT_LEARNING_RATE

DEFAULT_CLUSTER_LEVEL = 6
DEFAULT_TRAIN_RATIO = 0.15
TILE_SIZE = 16


class Strategy(StrEnum):
    UNIFORM = "uniform"
    POWER = "power"
    TREE_BASELINE = "tree-baseline"
    NEURAL_DIRECT = "neural-direct"
    NEURAL_RESIDUAL = "neural-residual"

    @property
    def is_neural(self) -> bool:
        return self in (Strategy.NEURAL_DIRECT, Strategy.NEURAL_RESIDUAL)

    @property
    def needs_tree(self) -> bool:
        return self in (Strategy.TREE_BASELINE, Strategy.NEURAL_DIRECT, Strategy.NEURAL_RESIDUAL)


class Crop(BaseModel):
    """Pixel window ``[x, x + width) × [y, y + height)`` of the full image."""

    model_config = ConfigDict(frozen=True)

    x: int = Field(..., ge=0)
    y: int = Field(..., ge=0)
    width: int = Field(..., ge=1)
    height: int = Field(..., ge=1)


class RenderConfig(BaseModel):
    """Everything that determines a render, apart from the scene itself."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    width: int = Field(256, ge=1, description="Image width in pixels")
    height: int = Field(256, ge=1, description="Image height in pixels")
    spp: int = Field(128, ge=1, description="Total samples per pixel; an upper bound when time_budget is set")
    strategy: Strategy = Strategy.NEURAL_RESIDUAL
    train_budget_ratio: float = Field(DEFAULT_TRAIN_RATIO, ge=0.0, lt=1.0)
    cluster_level: int = Field(DEFAULT_CLUSTER_LEVEL, ge=0)
    lr: float = Field(DEFAULT_LEARNING_RATE, gt=0.0)
    seed: int = Field(0, ge=0)
    time_budget: float | None = Field(None, gt=0.0, description="Seconds of rendering, measured from the first ray")
    importance: ImportanceMode = ImportanceMode.GEO_COS
    weight_clamp: bool = True
    discard_training_waves: bool = False
    input_mode: InputMode = InputMode.CONTINUOUS
    batch_size: int = Field(DEFAULT_BATCH_SIZE, ge=1)
    threads: int | None = Field(None, ge=1, description="Worker cap; falls back to LUMISEL_THREADS")
    crop: Crop | None = None

    @model_validator(mode="after")
    def _crop_inside_image(self) -> "RenderConfig":
        if self.crop is not None and (
            self.crop.x + self.crop.width > self.width or self.crop.y + self.crop.height > self.height
        ):
            raise ValueError("crop window extends past the image")
        return self

    @property
    def training_waves(self) -> int:
        """Waves that feed the trainer when no time budget is set: ⌈ratio · spp⌉ for neural strategies."""
        if not self.strategy.is_neural:
            return 0
        # round first so 0.1 · 30 does not become 4 waves
        return math.ceil(round(self.train_budget_ratio * self.spp, 9))

    @property
    def image_width(self) -> int:
        return self.crop.width if self.crop else self.width

    @property
    def image_height(self) -> int:
        return self.crop.height if self.crop else self.height
