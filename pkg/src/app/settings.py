import os
from functools import lru_cache
from pathlib import Path

from pydantic import BaseModel, Field, ValidationError

from utils.errors import ConfigurationError

THREADS_ENV = "LUMISEL_THREADS"
CACHE_DIR_ENV = "LUMISEL_CACHE_DIR"


class Settings(BaseModel):
    """Process-wide runtime settings read from the environment."""

    threads: int | None = Field(None, ge=1, description="Upper bound on render worker threads")
    cache_dir: Path = Field(Path.home() / ".cache" / "lumisel", description="Reference render cache")

    def worker_count(self, requested: int | None = None) -> int:
        """Workers to use: ``requested`` or the CPU count, capped by ``threads``."""
        count = requested or os.cpu_count() or 1
        return min(count, self.threads) if self.threads else count


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    values: dict = {}
    if os.environ.get(THREADS_ENV):
        values["threads"] = os.environ[THREADS_ENV]
    if os.environ.get(CACHE_DIR_ENV):
        values["cache_dir"] = os.environ[CACHE_DIR_ENV]
    try:
        return Settings.model_validate(values)
    except ValidationError as exc:
        raise ConfigurationError(
            f"invalid environment: {exc.errors()[0]['msg']}", variable=THREADS_ENV
        ) from exc
