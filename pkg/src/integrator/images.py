"""Image and statistics output: PFM, tonemapped PPM and per-wave CSV."""

import csv
import io
import re
from pathlib import Path

import numpy as np

from utils.files import atomic_write_bytes, atomic_write_text
from utils.logging import get_logger

logger = get_logger(__name__)

STATS_COLUMNS = ("wave", "spp", "seconds", "mse", "relmse", "strategy")
STATS_SCHEMA_VERSION = 1

_PFM_HEADER = re.compile(rb"^(PF|Pf)\s+(\d+)\s+(\d+)\s+(-?[\d.eE+-]+)\s")


def write_pfm(path: str | Path, image: np.ndarray) -> Path:
    """
    Write an (H, W, 3) image as little-endian float32 PFM.

    PFM stores rows bottom to top; ``image[0]`` is the top row.
    """
    image = np.asarray(image)
    height, width = image.shape[:2]
    header = f"PF\n{width} {height}\n-1.0\n".encode("ascii")
    body = np.ascontiguousarray(image[::-1], dtype="<f4").tobytes()
    path = atomic_write_bytes(path, header + body)
    logger.info("Wrote image '%s' (%dx%d).", path, width, height)
    return path


def read_pfm(path: str | Path) -> np.ndarray:
    """Read a colour PFM written by `write_pfm` (or any little/big-endian PF file)."""
    payload = Path(path).read_bytes()
    match = _PFM_HEADER.match(payload)
    if match is None or match.group(1) != b"PF":
        raise ValueError(f"'{path}' is not a colour PFM file")
    width, height = int(match.group(2)), int(match.group(3))
    scale = float(match.group(4))
    dtype = "<f4" if scale < 0 else ">f4"
    data = np.frombuffer(payload, dtype=dtype, count=width * height * 3, offset=match.end())
    return data.reshape(height, width, 3)[::-1].astype(np.float32)


def tonemap(image: np.ndarray) -> np.ndarray:
    """Clamp to [0, 1], apply the sRGB transfer curve and quantise to 8 bits."""
    linear = np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0)
    srgb = np.where(linear <= 0.0031308, 12.92 * linear, 1.055 * np.power(linear, 1.0 / 2.4) - 0.055)
    return np.round(srgb * 255.0).astype(np.uint8)


def write_ppm(path: str | Path, image: np.ndarray) -> Path:
    """Write the tonemapped (H, W, 3) image as binary PPM (P6)."""
    pixels = tonemap(image)
    height, width = pixels.shape[:2]
    header = f"P6\n{width} {height}\n255\n".encode("ascii")
    path = atomic_write_bytes(path, header + pixels.tobytes())
    logger.info("Wrote preview '%s'.", path)
    return path


def rows_csv(columns: tuple[str, ...] | list[str], rows: list[dict]) -> str:
    """CSV text with a header row; missing or None values become empty cells."""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if row.get(k) is None else row[k]) for k in columns})
    return buffer.getvalue()


def write_csv(path: str | Path, columns: tuple[str, ...] | list[str], rows: list[dict]) -> Path:
    path = atomic_write_text(path, rows_csv(columns, rows))
    logger.info("Wrote '%s' (%d rows).", path, len(rows))
    return path


def stats_csv(rows: list[dict]) -> str:
    return rows_csv(STATS_COLUMNS, rows)


def write_stats_csv(path: str | Path, rows: list[dict]) -> Path:
    """Per-wave statistics with columns ``wave, spp, seconds, mse, relmse, strategy``."""
    return write_csv(path, STATS_COLUMNS, rows)
