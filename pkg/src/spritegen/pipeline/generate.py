"""The end-to-end mapping from (reference image, pose sequence) to frames."""

from __future__ import annotations

import numpy as np
import torch

from ..core.types import PoseKeypoints, ReferenceImage, SpriteFrame
from ..data.composite import composite_background
from ..data.raster import rasterize_pose
from ..diffusion.sampling import sample_latents
from ..diffusion.schedule import make_schedule
from ..nets.archive import ParameterArchive
from ..nets.model import SpriteModel

__all__ = ["StageError", "generate"]


class StageError(ValueError):
    """Archive has not been trained far enough for the requested use."""


def generate(
    reference: ReferenceImage,
    poses: list[PoseKeypoints],
    archive: ParameterArchive,
    seed: int,
) -> list[SpriteFrame]:
    """Generate one RGB frame per pose, in pose order.

    Stage-1 archives run per-frame (temporal modules off); stage-2
    archives denoise the whole sequence jointly.
    """
    if archive.stage < 1:
        raise StageError(f"stage-{archive.stage} archive cannot generate; train stage 1 first")
    if not poses:
        raise ValueError("generate: need at least one pose")
    cfg = archive.config
    if reference.canvas != cfg.canvas_size:
        raise ValueError(
            f"generate: reference canvas {reference.canvas} != config canvas {cfg.canvas_size}"
        )
    for i, kp in enumerate(poses):
        if kp.canvas != cfg.canvas_size:
            raise ValueError(f"generate: pose {i} canvas {kp.canvas} != {cfg.canvas_size}")

    model = SpriteModel.from_archive(archive)
    model.eval()
    sched = make_schedule(cfg.diffusion_steps, cfg.beta_start, cfg.beta_end)

    ref_rgb = torch.from_numpy(
        np.ascontiguousarray(composite_background(reference.pixels), dtype=np.float32)
    ).permute(2, 0, 1)[None]
    pose_imgs = torch.stack(
        [
            torch.from_numpy(
                np.ascontiguousarray(rasterize_pose(kp, cfg.pose_thickness).pixels, dtype=np.float32)
            ).permute(2, 0, 1)
            for kp in poses
        ]
    )

    latents = sample_latents(
        model, sched, ref_rgb, pose_imgs, seed, motion_on=archive.stage >= 2
    )
    with torch.no_grad():
        frames = model.codec.decode(latents).clamp(0.0, 1.0)
    out = []
    for i in range(frames.shape[0]):
        pixels = frames[i].permute(1, 2, 0).cpu().numpy().astype(np.float64)
        out.append(SpriteFrame(pixels=pixels, index=i))
    return out
