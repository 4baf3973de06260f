"""PNG I/O at the [0, 1] float boundary.

Images are stored as 8-bit PNG and decoded to float32 arrays in [0, 1].
Encoding rounds to the nearest 8-bit level, so save -> load is exact for
arrays that came from 8-bit sources.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

__all__ = ["load_rgba", "load_rgb", "save_image"]


def load_rgba(path: str | Path) -> np.ndarray:
    """Decode a PNG to an (H, W, 4) float32 array in [0, 1]."""
    with Image.open(path) as img:
        arr = np.asarray(img.convert("RGBA"), dtype=np.uint8)
    return arr.astype(np.float32) / 255.0


def load_rgb(path: str | Path) -> np.ndarray:
    """Decode a PNG to an (H, W, 3) float32 array in [0, 1]."""
    with Image.open(path) as img:
        arr = np.asarray(img.convert("RGB"), dtype=np.uint8)
    return arr.astype(np.float32) / 255.0


def save_image(pixels: np.ndarray, path: str | Path) -> None:
    """Encode an (H, W, 3|4) float array in [0, 1] as an 8-bit PNG."""
    if pixels.ndim != 3 or pixels.shape[2] not in (3, 4):
        raise ValueError(f"save_image: expected HxWx3 or HxWx4 array, got shape {pixels.shape}")
    quantized = np.clip(np.asarray(pixels, dtype=np.float64) * 255.0 + 0.5, 0, 255).astype(np.uint8)
    mode = "RGBA" if pixels.shape[2] == 4 else "RGB"
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(quantized, mode=mode).save(path, format="PNG")
