"""Skeleton rasterization.

A pose is rendered onto an exactly-black canvas: every bone whose two
endpoints are both visible becomes a line segment of the requested
thickness (a pixel is covered when its center lies within thickness/2 of
the segment), and every visible joint becomes a filled disc of radius
thickness/2.  Bones are drawn in edge-list order, then joints on top.

Colors follow the OpenPose 18-color palette.  Bone ``i`` uses palette
entry ``i``; a joint reuses the palette entry of the first bone incident
to it, so a fully visible pose contains exactly the palette entries of
its bones.
"""

from __future__ import annotations

import numpy as np

from ..core.types import BONES, PoseImage, PoseKeypoints

__all__ = ["PALETTE", "bone_color", "joint_color", "rasterize_pose"]

PALETTE = np.array(
    [
        [255, 0, 0], [255, 85, 0], [255, 170, 0], [255, 255, 0], [170, 255, 0],
        [85, 255, 0], [0, 255, 0], [0, 255, 85], [0, 255, 170], [0, 255, 255],
        [0, 170, 255], [0, 85, 255], [0, 0, 255], [85, 0, 255], [170, 0, 255],
        [255, 0, 255], [255, 0, 170], [255, 0, 85],
    ],
    dtype=np.float64,
) / 255.0

_FIRST_BONE_OF_JOINT = {}
for _i, (_a, _b) in enumerate(BONES):
    for _j in (_a, _b):
        _FIRST_BONE_OF_JOINT.setdefault(_j, _i)


def bone_color(bone_index: int) -> np.ndarray:
    return PALETTE[bone_index]


def joint_color(joint_index: int) -> np.ndarray:
    return PALETTE[_FIRST_BONE_OF_JOINT[joint_index]]


def _paint_segment(canvas: np.ndarray, p0, p1, radius: float, color: np.ndarray) -> None:
    """Color every pixel whose center is within ``radius`` of segment p0-p1."""
    h, w = canvas.shape[:2]
    x0, y0 = p0
    x1, y1 = p1
    xmin = max(int(np.floor(min(x0, x1) - radius)), 0)
    xmax = min(int(np.ceil(max(x0, x1) + radius)), w - 1)
    ymin = max(int(np.floor(min(y0, y1) - radius)), 0)
    ymax = min(int(np.ceil(max(y0, y1) + radius)), h - 1)
    if xmin > xmax or ymin > ymax:
        return
    ys, xs = np.mgrid[ymin : ymax + 1, xmin : xmax + 1]
    dx, dy = x1 - x0, y1 - y0
    seg_len2 = dx * dx + dy * dy
    if seg_len2 == 0.0:
        dist2 = (xs - x0) ** 2 + (ys - y0) ** 2
    else:
        t = np.clip(((xs - x0) * dx + (ys - y0) * dy) / seg_len2, 0.0, 1.0)
        dist2 = (xs - (x0 + t * dx)) ** 2 + (ys - (y0 + t * dy)) ** 2
    mask = dist2 <= radius * radius
    canvas[ymin : ymax + 1, xmin : xmax + 1][mask] = color


def rasterize_pose(kp: PoseKeypoints, thickness: int = 3) -> PoseImage:
    """Render a pose annotation to a PoseImage.

    Pure function of (kp, thickness); an all-invisible pose yields an
    all-black image.
    """
    if thickness < 1:
        raise ValueError(f"rasterize_pose: thickness must be >= 1, got {thickness}")
    h, w = kp.canvas
    canvas = np.zeros((h, w, 3), dtype=np.float64)
    radius = thickness / 2.0
    pts = kp.points
    vis = kp.visible
    for i, (a, b) in enumerate(BONES):
        if vis[a] and vis[b]:
            _paint_segment(canvas, pts[a, :2], pts[b, :2], radius, bone_color(i))
    for j in range(len(pts)):
        if vis[j]:
            _paint_segment(canvas, pts[j, :2], pts[j, :2], radius, joint_color(j))
    return PoseImage(pixels=canvas, source=kp)
