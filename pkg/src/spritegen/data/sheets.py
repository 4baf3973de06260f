"""Sprite-sheet slicing: unpack a grid of frames from one RGBA image."""

from __future__ import annotations

import numpy as np

from ..core.types import SpriteFrame

__all__ = ["slice_sprite_sheet", "pack_sprite_sheet"]


def slice_sprite_sheet(
    sheet: np.ndarray, grid: tuple[int, int], frame_size: tuple[int, int]
) -> list[SpriteFrame]:
    """Cut a packed sheet into rows*cols frames in row-major order.

    Each frame is a pixel-exact sub-rectangle of the sheet; slicing then
    re-packing reproduces the sheet bit for bit.
    """
    rows, cols = grid
    fh, fw = frame_size
    if sheet.ndim != 3 or sheet.shape[2] != 4:
        raise ValueError(f"slice_sprite_sheet: expected HxWx4 RGBA sheet, got shape {sheet.shape}")
    if sheet.shape[0] != rows * fh or sheet.shape[1] != cols * fw:
        raise ValueError(
            f"slice_sprite_sheet: sheet is {sheet.shape[0]}x{sheet.shape[1]} but grid "
            f"{rows}x{cols} of {fh}x{fw} frames needs {rows * fh}x{cols * fw}"
        )
    frames = []
    for r in range(rows):
        for c in range(cols):
            tile = sheet[r * fh : (r + 1) * fh, c * fw : (c + 1) * fw].copy()
            frames.append(SpriteFrame(pixels=tile, index=r * cols + c))
    return frames


def pack_sprite_sheet(frames: list[SpriteFrame], grid: tuple[int, int]) -> np.ndarray:
    """Inverse of slice_sprite_sheet; frames must share one size."""
    rows, cols = grid
    if len(frames) != rows * cols:
        raise ValueError(f"pack_sprite_sheet: got {len(frames)} frames for {rows}x{cols} grid")
    fh, fw = frames[0].canvas
    sheet = np.zeros((rows * fh, cols * fw, 4), dtype=frames[0].pixels.dtype)
    for i, frame in enumerate(frames):
        if frame.canvas != (fh, fw):
            raise ValueError("pack_sprite_sheet: frames differ in size")
        r, c = divmod(i, cols)
        sheet[r * fh : (r + 1) * fh, c * fw : (c + 1) * fw] = frame.pixels
    return sheet
