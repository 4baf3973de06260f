"""Decode dataset records into the stacked tensors the trainers consume.

Ground-truth RGBA frames are composited over white, poses are rasterized
at the configured thickness, and everything lands as float32 CHW tensors
in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from ..core.config import RunConfig
from ..core.imageio import load_rgba
from ..data.composite import composite_background
from ..data.manifest import Manifest, Triplet
from ..data.pose_io import load_pose
from ..data.raster import rasterize_pose

__all__ = ["TripletBatch", "SequenceTensors", "load_triplet_batch", "load_sequence_tensors"]


def _to_chw(img: np.ndarray) -> torch.Tensor:
    return torch.from_numpy(np.ascontiguousarray(img, dtype=np.float32)).permute(2, 0, 1)


def _load_rgb_composited(path: Path, cfg: RunConfig) -> torch.Tensor:
    rgba = load_rgba(path)
    if rgba.shape[:2] != cfg.canvas_size:
        raise ValueError(
            f"{path}: image is {rgba.shape[0]}x{rgba.shape[1]}, config expects "
            f"{cfg.canvas_size[0]}x{cfg.canvas_size[1]}"
        )
    return _to_chw(composite_background(rgba))


def _load_pose_raster(path: Path, cfg: RunConfig) -> torch.Tensor:
    kp = load_pose(path)
    if kp.canvas != cfg.canvas_size:
        raise ValueError(f"{path}: pose canvas {kp.canvas} != config canvas {cfg.canvas_size}")
    return _to_chw(rasterize_pose(kp, cfg.pose_thickness).pixels)


@dataclass
class TripletBatch:
    """All triplets of a split, stacked: index rows correspond."""

    reference: torch.Tensor  # (N, 3, H, W)
    pose: torch.Tensor       # (N, 3, H, W)
    target: torch.Tensor     # (N, 3, H, W)

    def __len__(self) -> int:
        return self.target.shape[0]

    def select(self, idx: torch.Tensor) -> dict[str, torch.Tensor]:
        return {
            "reference": self.reference[idx],
            "pose": self.pose[idx],
            "target": self.target[idx],
        }


@dataclass
class SequenceTensors:
    """One action sequence, fully decoded."""

    character_id: str
    action_name: str
    reference: torch.Tensor  # (3, H, W)
    poses: torch.Tensor      # (m, 3, H, W)
    targets: torch.Tensor    # (m, 3, H, W)

    def __len__(self) -> int:
        return self.targets.shape[0]


def load_triplet_batch(root: str | Path, triplets: list[Triplet], cfg: RunConfig) -> TripletBatch:
    root = Path(root)
    refs, poses, targets = [], [], []
    ref_cache: dict[str, torch.Tensor] = {}
    for tr in triplets:
        if tr.reference_path not in ref_cache:
            ref_cache[tr.reference_path] = _load_rgb_composited(root / tr.reference_path, cfg)
        refs.append(ref_cache[tr.reference_path])
        poses.append(_load_pose_raster(root / tr.pose_path, cfg))
        targets.append(_load_rgb_composited(root / tr.target_path, cfg))
    if not targets:
        raise ValueError("load_triplet_batch: empty triplet list")
    return TripletBatch(
        reference=torch.stack(refs), pose=torch.stack(poses), target=torch.stack(targets)
    )


def load_sequence_tensors(
    root: str | Path, manifest: Manifest, cfg: RunConfig, characters: set[str] | None = None
) -> list[SequenceTensors]:
    root = Path(root)
    out = []
    for character in manifest.characters:
        if characters is not None and character.character_id not in characters:
            continue
        ref = _load_rgb_composited(root / character.reference_frame_path, cfg)
        for seq in character.sequences:
            out.append(
                SequenceTensors(
                    character_id=character.character_id,
                    action_name=seq.action_name,
                    reference=ref,
                    poses=torch.stack([_load_pose_raster(root / p, cfg) for p in seq.pose_paths]),
                    targets=torch.stack([_load_rgb_composited(root / p, cfg) for p in seq.frame_paths]),
                )
            )
    return out
