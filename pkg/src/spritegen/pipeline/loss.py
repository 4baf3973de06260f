"""Noise-prediction training objective.

Per batch item a timestep is drawn uniformly, the clean latent is noised
to it, and the loss is the mean squared error between the drawn noise and
the model's prediction.  All randomness comes from the caller's generator
so a run (or a finite-difference probe) can replay draws exactly.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F

from ..diffusion.schedule import NoiseSchedule, q_sample
from ..nets.archive import GROUPS
from ..nets.model import SpriteModel

__all__ = ["STAGE_TRAINABLE", "compute_loss", "training_loss"]

STAGE_TRAINABLE = {
    1: ("denoiser", "referencenet", "pose_guider", "embedder", "codec"),
    2: ("motion",),
}


def compute_loss(
    model: SpriteModel,
    sched: NoiseSchedule,
    batch: dict[str, torch.Tensor],
    rng: torch.Generator,
    motion_on: bool = False,
    clip_len: int = 1,
) -> torch.Tensor:
    """Differentiable scalar loss on a batch of (target, pose, reference)."""
    target, pose, ref = batch["target"], batch["pose"], batch["reference"]
    if target.shape[0] == 0:
        raise ValueError("compute_loss: empty batch")
    z0 = model.codec.encode(target)
    b = z0.shape[0]
    t = torch.randint(0, sched.steps, (b,), generator=rng)
    noise = torch.randn(z0.shape, generator=rng, dtype=z0.dtype)
    x_t = q_sample(z0, t, noise, sched)
    bank, ctx = model.encode_reference(ref)
    pose_residual = model.pose_guider(pose)
    eps_pred = model.denoise(
        x_t, t, bank=bank, pose_residual=pose_residual, ctx=ctx,
        motion_on=motion_on, clip_len=clip_len,
    )
    return F.mse_loss(eps_pred, noise)


def training_loss(
    model: SpriteModel,
    sched: NoiseSchedule,
    batch: dict[str, torch.Tensor],
    rng: torch.Generator,
    stage: int,
    clip_len: int = 1,
) -> tuple[float, dict[str, dict[str, torch.Tensor]]]:
    """Loss plus per-parameter gradients; frozen groups get zeros."""
    if stage not in STAGE_TRAINABLE:
        raise ValueError(f"training_loss: stage must be 1 or 2, got {stage}")
    trainable = STAGE_TRAINABLE[stage]
    model.set_trainable(trainable)
    model.zero_grad(set_to_none=True)
    loss = compute_loss(
        model, sched, batch, rng, motion_on=(stage == 2), clip_len=clip_len
    )
    loss.backward()
    grads: dict[str, dict[str, torch.Tensor]] = {}
    for group in GROUPS:
        module = model.group_module(group)
        grads[group] = {
            name: (p.grad.detach().clone() if p.grad is not None else torch.zeros_like(p))
            for name, p in module.named_parameters()
        }
    return float(loss.detach()), grads
