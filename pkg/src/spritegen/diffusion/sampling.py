"""Joint DDIM sampling of an action sequence.

All frames of a sequence are denoised together: the reference token bank
is computed once from the reference image, each frame gets its own pose
residual, and (for stage-2 models) temporal attention couples the frames
at every step.  With the temporal modules at their zero init, frames are
mathematically independent and joint sampling coincides with sampling
each frame alone on the same initial noise.
"""

from __future__ import annotations

import torch

from ..core.config import RunConfig
from ..core.seeding import SeedHub
from ..nets.model import SpriteModel
from .ddim import ddim_step, ddim_timesteps
from .schedule import NoiseSchedule, make_schedule

__all__ = ["sample_latents", "sample_sequence"]


def sample_latents(
    model: SpriteModel,
    sched: NoiseSchedule,
    ref_rgb: torch.Tensor,
    pose_images: torch.Tensor,
    seed: int,
    motion_on: bool,
    sampler_steps: int | None = None,
    eta: float | None = None,
    initial_noise: torch.Tensor | None = None,
) -> torch.Tensor:
    """Denoise ``pose_images.shape[0]`` frames conditioned on one reference.

    ref_rgb: (1, 3, H, W) composited reference; pose_images: (n, 3, H, W).
    Returns the final latents in pose order, shape (n, C, h, w).
    """
    cfg = model.cfg
    n = pose_images.shape[0]
    if n < 1:
        raise ValueError("sample_latents: need at least one pose")
    steps = cfg.sampler_steps if sampler_steps is None else sampler_steps
    eta = cfg.eta if eta is None else eta

    hub = SeedHub(seed)
    lat_h, lat_w = cfg.latent_size
    shape = (n, cfg.latent_channels, lat_h, lat_w)
    dtype = next(model.parameters()).dtype
    if initial_noise is None:
        z = torch.randn(shape, generator=hub.generator("sample.init"), dtype=dtype)
    else:
        if tuple(initial_noise.shape) != shape:
            raise ValueError(
                f"sample_latents: initial noise shape {tuple(initial_noise.shape)} != {shape}"
            )
        z = initial_noise.to(dtype)
    step_rng = hub.generator("sample.step_noise")

    with torch.no_grad():
        bank, ctx = model.encode_reference(ref_rgb)
        bank = [entry.expand(n, -1, -1) for entry in bank]
        ctx = ctx.expand(n, -1, -1)
        pose_residual = model.pose_guider(pose_images.to(dtype))

        ladder = ddim_timesteps(sched.steps, steps)
        for i, t in enumerate(ladder):
            t_prev = ladder[i + 1] if i + 1 < len(ladder) else -1
            eps = model.denoise(
                z, t, bank=bank, pose_residual=pose_residual, ctx=ctx,
                motion_on=motion_on, clip_len=n,
            )
            z = ddim_step(z, eps, t, t_prev, eta, sched, rng=step_rng)
    return z


def sample_sequence(
    ref_rgb: torch.Tensor,
    pose_images: torch.Tensor,
    archive,
    seed: int,
    initial_noise: torch.Tensor | None = None,
) -> torch.Tensor:
    """Archive-level entry point; motion is used only for stage-2 weights."""
    if archive.stage < 1:
        raise ValueError("sample_sequence: stage-0 archive has not been trained")
    model = SpriteModel.from_archive(archive)
    model.eval()
    cfg: RunConfig = archive.config
    sched = make_schedule(cfg.diffusion_steps, cfg.beta_start, cfg.beta_end)
    return sample_latents(
        model, sched, ref_rgb, pose_images, seed,
        motion_on=archive.stage >= 2, initial_noise=initial_noise,
    )
