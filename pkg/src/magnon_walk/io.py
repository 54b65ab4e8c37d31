"""File output: versioned CSV/JSON tables, PGM/PPM frames, manifests and config files."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError

CSV_HEADER = "# magnon-walk v1"
FORMATS = ("csv", "json")

# Anchor colours of a viridis-like map, spaced evenly on [0, 1].
_ANCHORS = np.array(
    [
        (68, 1, 84),
        (72, 40, 120),
        (62, 74, 137),
        (49, 104, 142),
        (38, 130, 142),
        (31, 158, 137),
        (53, 183, 121),
        (109, 205, 89),
        (180, 222, 44),
        (253, 231, 37),
    ],
    dtype=float,
)


def _build_colormap() -> np.ndarray:
    x = np.linspace(0.0, 1.0, 256)
    xa = np.linspace(0.0, 1.0, len(_ANCHORS))
    table = np.column_stack([np.interp(x, xa, _ANCHORS[:, c]) for c in range(3)])
    return np.rint(table).astype(np.uint8)


COLORMAP = _build_colormap()


def fmt(x) -> str:
    """Deterministic text for numbers: 12 significant digits, ints verbatim."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if np.isnan(x):
        return "nan"
    return format(x, ".12g")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer, int)) and not isinstance(x, bool):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return None if np.isnan(x) else float(fmt(x))
    return x


def write_json(path: Path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def write_table(path: Path, columns: Sequence[str], rows: Iterable[Sequence], fmt_name: str = "csv") -> Path:
    """Write rows as versioned CSV, or as a JSON list of records.

    ``path`` is given without extension; the format's suffix is appended.
    """
    if fmt_name not in FORMATS:
        raise ValidationError(f"format must be one of {FORMATS}, got {fmt_name!r}")
    path = Path(path).with_suffix("." + fmt_name)
    rows = [list(r) for r in rows]
    if fmt_name == "json":
        return write_json(path, {"version": CSV_HEADER[2:], "columns": list(columns), "rows": rows})
    lines = [CSV_HEADER, ",".join(columns)]
    lines += [",".join(fmt(v) for v in r) for r in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_table(path: Path) -> tuple[list[str], np.ndarray]:
    """Read back a CSV written by :func:`write_table`."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValidationError(f"{path}: missing {CSV_HEADER!r} header")
    cols = lines[1].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:]]).reshape(-1, len(cols))
    return cols, data


@dataclass
class FrameImage:
    """Pixel intensities of one frame; rows run from +y (top) to -y."""

    width: int
    height: int
    pixels: np.ndarray
    normalization: str

    @property
    def is_color(self) -> bool:
        return self.pixels.ndim == 3


def frame_image(values: np.ndarray, vmax: float | None = None, color: bool = True) -> FrameImage:
    """Map a (nx, ny) density array to 8-bit pixels.

    Intensities are ``values / vmax`` (per-frame maximum by default),
    clipped to [0, 1] and quantised to 256 levels.
    """
    values = np.asarray(values, dtype=float)
    mode = "frame" if vmax is None else "global"
    vmax = values.max() if vmax is None else vmax
    scaled = np.clip(values / vmax, 0.0, 1.0) if vmax > 0 else np.zeros_like(values)
    level = np.rint(scaled * 255).astype(np.uint8)
    # image row = -y, column = x
    level = level.T[::-1]
    pixels = COLORMAP[level] if color else level
    return FrameImage(values.shape[0], values.shape[1], pixels, mode)


def write_pnm(path: Path, image: FrameImage) -> Path:
    """Binary PPM (P6) for colour images, PGM (P5) for grayscale."""
    path = Path(path).with_suffix(".ppm" if image.is_color else ".pgm")
    magic = b"P6" if image.is_color else b"P5"
    head = magic + f"\n{image.width} {image.height}\n255\n".encode()
    path.write_bytes(head + np.ascontiguousarray(image.pixels, dtype=np.uint8).tobytes())
    return path


def read_pnm(path: Path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    magic, w, h, raw = parts[0], int(parts[1]), int(parts[2]), parts[4]
    channels = 3 if magic == b"P6" else 1
    arr = np.frombuffer(raw[: w * h * channels], dtype=np.uint8)
    return arr.reshape((h, w, 3) if channels == 3 else (h, w))


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out_dir: Path, command: str, params: dict, files: Sequence[Path], extra: dict | None = None) -> Path:
    """manifest.json listing parameters and the sha256 of every emitted file."""
    out_dir = Path(out_dir)
    body = {
        "command": command,
        "params": params,
        "files": {Path(f).name: sha256_file(f) for f in files},
    }
    if extra:
        body.update(extra)
    return write_json(out_dir / "manifest.json", body)


def load_config(path: Path) -> dict[str, str]:
    """Parse a flat ``key = value`` file; ``#`` starts a comment, quotes are stripped."""
    out = {}
    for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line or (line.startswith("[") and line.endswith("]")):
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        out[key.replace("-", "_")] = value
    return out
