"""Pose annotation files.

One JSON document per frame, versioned, holding the 18 named keypoints
with visibility flags plus the canvas size:

    {
      "schema_version": 1,
      "canvas": {"height": 64, "width": 64},
      "points": [{"name": "nose", "x": 31.5, "y": 9.0, "visible": true}, ...]
    }

Points must appear in the canonical keypoint order.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..core.types import KEYPOINT_NAMES, PoseKeypoints

__all__ = ["POSE_SCHEMA_VERSION", "load_pose", "save_pose"]

POSE_SCHEMA_VERSION = 1


def load_pose(path: str | Path) -> PoseKeypoints:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("schema_version") != POSE_SCHEMA_VERSION:
        raise ValueError(
            f"{path}: pose schema_version {doc.get('schema_version')} != {POSE_SCHEMA_VERSION}"
        )
    entries = doc["points"]
    if len(entries) != 18:
        raise ValueError(f"{path}: expected 18 keypoints, got {len(entries)}")
    pts = np.zeros((18, 3), dtype=np.float64)
    for i, entry in enumerate(entries):
        if entry["name"] != KEYPOINT_NAMES[i]:
            raise ValueError(
                f"{path}: keypoint {i} named {entry['name']!r}, expected {KEYPOINT_NAMES[i]!r}"
            )
        pts[i] = (float(entry["x"]), float(entry["y"]), 1.0 if entry["visible"] else 0.0)
    canvas = (int(doc["canvas"]["height"]), int(doc["canvas"]["width"]))
    return PoseKeypoints(points=pts, canvas=canvas)


def save_pose(kp: PoseKeypoints, path: str | Path) -> None:
    doc = {
        "schema_version": POSE_SCHEMA_VERSION,
        "canvas": {"height": kp.canvas[0], "width": kp.canvas[1]},
        "points": [
            {
                "name": KEYPOINT_NAMES[i],
                "x": float(kp.points[i, 0]),
                "y": float(kp.points[i, 1]),
                "visible": bool(kp.points[i, 2] > 0.5),
            }
            for i in range(18)
        ],
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")
