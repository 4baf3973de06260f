"""Alpha compositing onto a flat background color."""

from __future__ import annotations

import numpy as np

__all__ = ["WHITE", "composite_background"]

WHITE = (1.0, 1.0, 1.0)


def composite_background(img: np.ndarray, bg: tuple[float, float, float] = WHITE) -> np.ndarray:
    """Blend an (H, W, 4) RGBA frame over a solid color: a*rgb + (1-a)*bg.

    Already-RGB input is returned unchanged (a copy), so callers can
    normalize mixed inputs with one call.
    """
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] not in (3, 4):
        raise ValueError(f"composite_background: expected HxWx3|4 array, got shape {arr.shape}")
    if arr.shape[2] == 3:
        return arr.copy()
    alpha = arr[..., 3:4]
    bg_arr = np.asarray(bg, dtype=arr.dtype).reshape(1, 1, 3)
    return alpha * arr[..., :3] + (1.0 - alpha) * bg_arr
