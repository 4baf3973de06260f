"""Shared domain types.

These are immutable value objects over numpy arrays, validated at
construction, safe to share across threads.  Pixel data is always float
in [0, 1] at this boundary; networks remap to their internal range
behind the nets module interface.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "KEYPOINT_NAMES",
    "BONES",
    "ReferenceImage",
    "PoseKeypoints",
    "PoseImage",
    "SpriteFrame",
    "ActionSequence",
]

# 18-point skeleton in the OpenPose/COCO-18 convention.
KEYPOINT_NAMES = (
    "nose", "neck",
    "r_shoulder", "r_elbow", "r_wrist",
    "l_shoulder", "l_elbow", "l_wrist",
    "r_hip", "r_knee", "r_ankle",
    "l_hip", "l_knee", "l_ankle",
    "r_eye", "l_eye", "r_ear", "l_ear",
)

# The fixed 17-bone edge list (parent, child) over the 18 joints.
BONES = (
    (1, 2), (1, 5), (2, 3), (3, 4), (5, 6), (6, 7),
    (1, 8), (8, 9), (9, 10), (1, 11), (11, 12), (12, 13),
    (1, 0), (0, 14), (14, 15), (0, 16), (16, 17),
)


def _check_unit_range(pixels: np.ndarray, what: str) -> None:
    if not np.isfinite(pixels).all():
        raise ValueError(f"{what}: pixel values must be finite")
    if pixels.min() < 0.0 or pixels.max() > 1.0:
        raise ValueError(f"{what}: pixel values must lie in [0, 1]")


@dataclass(frozen=True)
class ReferenceImage:
    """RGBA raster defining a character's appearance."""

    pixels: np.ndarray  # (H, W, 4) float in [0, 1]
    character_id: str

    def __post_init__(self):
        px = self.pixels
        if px.ndim != 3 or px.shape[2] != 4:
            raise ValueError(f"ReferenceImage: expected HxWx4 RGBA array, got shape {px.shape}")
        _check_unit_range(px, "ReferenceImage")
        px.setflags(write=False)

    @property
    def canvas(self) -> tuple[int, int]:
        return self.pixels.shape[:2]


@dataclass(frozen=True)
class PoseKeypoints:
    """18-point skeleton annotation on a fixed canvas.

    ``points`` rows are (x, y, visible) with pixel coordinates; invisible
    points carry arbitrary coordinates and are ignored everywhere.
    """

    points: np.ndarray  # (18, 3): x, y, visible flag (0/1)
    canvas: tuple[int, int]  # (H, W)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.shape != (18, 3):
            raise ValueError(f"PoseKeypoints: expected 18x3 point array, got shape {pts.shape}")
        h, w = self.canvas
        vis = pts[:, 2] > 0.5
        x, y = pts[:, 0], pts[:, 1]
        if vis.any():
            bad = vis & ~((x >= 0) & (x < w) & (y >= 0) & (y < h))
            if bad.any():
                names = [KEYPOINT_NAMES[i] for i in np.nonzero(bad)[0]]
                raise ValueError(f"PoseKeypoints: visible points outside canvas bounds: {names}")
        object.__setattr__(self, "points", pts)
        pts.setflags(write=False)

    @property
    def visible(self) -> np.ndarray:
        return self.points[:, 2] > 0.5


@dataclass(frozen=True)
class PoseImage:
    """Rasterized skeleton: RGB on an exactly-black background."""

    pixels: np.ndarray  # (H, W, 3) float in [0, 1]
    source: PoseKeypoints | None = None

    def __post_init__(self):
        px = self.pixels
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"PoseImage: expected HxWx3 RGB array, got shape {px.shape}")
        _check_unit_range(px, "PoseImage")
        if self.source is not None and self.source.canvas != px.shape[:2]:
            raise ValueError(
                f"PoseImage: canvas {px.shape[:2]} does not match source canvas {self.source.canvas}"
            )
        px.setflags(write=False)

    @property
    def canvas(self) -> tuple[int, int]:
        return self.pixels.shape[:2]


@dataclass(frozen=True)
class SpriteFrame:
    """One frame of an action sequence.

    Ground-truth frames are RGBA; generated frames are RGB.  ``index`` is
    the frame's position within its sequence.
    """

    pixels: np.ndarray  # (H, W, 4) or (H, W, 3) float in [0, 1]
    index: int

    def __post_init__(self):
        px = self.pixels
        if px.ndim != 3 or px.shape[2] not in (3, 4):
            raise ValueError(f"SpriteFrame: expected HxWx3 or HxWx4 array, got shape {px.shape}")
        _check_unit_range(px, "SpriteFrame")
        if self.index < 0:
            raise ValueError(f"SpriteFrame: index must be >= 0, got {self.index}")
        px.setflags(write=False)

    @property
    def canvas(self) -> tuple[int, int]:
        return self.pixels.shape[:2]


@dataclass(frozen=True)
class ActionSequence:
    """Ordered frames plus their poses for one character action."""

    character_id: str
    action_name: str
    frames: tuple[SpriteFrame, ...]
    poses: tuple[PoseKeypoints, ...]

    def __post_init__(self):
        frames = tuple(self.frames)
        poses = tuple(self.poses)
        if len(frames) != len(poses) or len(frames) < 1:
            raise ValueError(
                f"ActionSequence {self.character_id}/{self.action_name}: need equal, non-empty "
                f"frame/pose lists, got {len(frames)} frames and {len(poses)} poses"
            )
        indices = [f.index for f in frames]
        if indices != list(range(len(frames))):
            raise ValueError(
                f"ActionSequence {self.character_id}/{self.action_name}: frame indices must be "
                f"contiguous 0..n-1, got {indices}"
            )
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "poses", poses)

    def __len__(self) -> int:
        return len(self.frames)
