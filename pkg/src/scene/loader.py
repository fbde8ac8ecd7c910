"""Reading and writing scene files."""

import json
from pathlib import Path

from pydantic import ValidationError

from scene.document import SceneDocument, build_scene
from scene.scene import Scene
from utils.errors import SceneParseError
from utils.files import atomic_write_text
from utils.logging import get_logger

logger = get_logger(__name__)


def parse_scene_document(text: str, lenient: bool = False) -> SceneDocument:
    """
    Parse scene JSON text into a validated `SceneDocument`.

    Arguments:
        text (str): UTF-8 scene document.
        lenient (bool, optional): Drop unknown fields with a warning instead of failing.

    Raises:
        SceneParseError: Malformed JSON (with line and column) or schema violations
            (with the dotted path of the first offending field).
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneParseError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    try:
        return SceneDocument.model_validate(data, context={"lenient": lenient})
    except ValidationError as exc:
        first = exc.errors()[0]
        field = ".".join(str(part) for part in first["loc"])
        raise SceneParseError(
            f"{first['msg']} ({exc.error_count()} error(s))", field=field or None
        ) from exc


def load_scene(path: str | Path, lenient: bool = False) -> Scene:
    """
    Load and fully validate a scene file.

    Light indices follow the order of the file's ``lights`` array.

    Arguments:
        path (str | Path): Scene document; sidecar buffers resolve relative to it.
        lenient (bool, optional): Accept unknown fields (``--lenient``).

    Returns:
        Scene: Immutable, ready to render.

    Raises:
        SceneParseError: Syntax or schema errors.
        SceneValidationError: Degenerate lights, dangling material references, bad buffers.
        OSError: The file cannot be read.
    """
    path = Path(path)
    logger.info("Loading scene '%s'.", path)
    document = parse_scene_document(path.read_text(encoding="utf-8"), lenient=lenient)
    return build_scene(document, base_dir=path.parent)


def write_scene_document(document: SceneDocument, path: str | Path) -> Path:
    """Write ``document`` as indented JSON, atomically (temp file + rename)."""
    path = atomic_write_text(path, document.model_dump_json(indent=2) + "\n")
    logger.info("Wrote scene '%s'.", path)
    return path
