from datetime import datetime
from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field

from utils.files import atomic_write_text

MANIFEST_VERSION = 1
MANIFEST_NAME = "manifest.json"


class RunManifest(BaseModel):
    """Everything needed to re-run the command that produced an output directory."""

    version: int = MANIFEST_VERSION
    command: str = Field(..., description="Sub-command name, e.g. 'render'")
    flags: dict[str, Any] = Field(
        default_factory=dict, description="Parsed command-line flags, global ones included"
    )
    config: dict[str, Any] = Field(default_factory=dict, description="Resolved configuration snapshot")
    scene: str | None = Field(None, description="Scene path or preset name")
    scene_hash: str | None = None
    build_id: str
    seed: int
    started_at: datetime
    wall_clock_seconds: float = Field(..., description="Whole command, including scene load")
    render_seconds: float | None = Field(None, description="First ray to last wave")
    setup_seconds: float | None = Field(None, description="Light tree build, cut selection, network init")
    stats_schema_version: int | None = None
    outputs: dict[str, str] = Field(default_factory=dict, description="Output kind to path")


def write_manifest(manifest: RunManifest, directory: str | Path) -> Path:
    return atomic_write_text(Path(directory) / MANIFEST_NAME, manifest.model_dump_json(indent=2) + "\n")
