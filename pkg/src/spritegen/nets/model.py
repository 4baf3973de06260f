"""The full generative model: six parameter groups behind one object.

Groups: denoiser, referencenet (a twin UNet that exports per-site token
maps from the clean reference latent), pose_guider, motion (temporal
attention stack, only consulted when motion is on), embedder (context
tokens), codec.
"""

from __future__ import annotations

import torch
from torch import nn

from ..core.config import RunConfig
from .archive import GROUPS, ParameterArchive
from .codec import build_codec
from .conditioning import ImageEmbedder, MotionStack, PoseGuider
from .unet import CondUNet

__all__ = ["SpriteModel"]


class SpriteModel(nn.Module):
    def __init__(self, cfg: RunConfig):
        super().__init__()
        self.cfg = cfg
        self.denoiser = CondUNet(cfg)
        self.referencenet = CondUNet(cfg)
        self.pose_guider = PoseGuider(cfg)
        self.motion = MotionStack(cfg)
        self.embedder = ImageEmbedder(cfg)
        self.codec = build_codec(cfg)

    def group_module(self, group: str) -> nn.Module:
        if group not in GROUPS:
            raise KeyError(f"unknown parameter group {group!r}")
        return getattr(self, group)

    def parameters_of(self, groups) -> list[nn.Parameter]:
        params = []
        for g in groups:
            params.extend(self.group_module(g).parameters())
        return params

    def set_trainable(self, groups) -> None:
        """Enable gradients for exactly the listed groups."""
        wanted = set(groups)
        for g in GROUPS:
            flag = g in wanted
            for p in self.group_module(g).parameters():
                p.requires_grad_(flag)

    # -- conditioning ---------------------------------------------------

    def encode_reference(self, ref_rgb: torch.Tensor) -> tuple[list[torch.Tensor], torch.Tensor]:
        """Context tokens and per-site reference token maps for a batch of
        composited reference images.  Computed once per sample and reused
        across all denoising steps."""
        ctx = self.embedder(ref_rgb)
        z_ref = self.codec.encode(ref_rgb)
        return self.referencenet_forward(z_ref, ctx), ctx

    def referencenet_forward(self, z_ref: torch.Tensor, ctx: torch.Tensor) -> list[torch.Tensor]:
        """Full twin-UNet pass on the clean reference latent at the fixed
        conditioning timestep 0, exporting each site's token map."""
        t0 = torch.zeros(z_ref.shape[0], dtype=torch.long, device=z_ref.device)
        _, bank = self.referencenet(z_ref, t0, bank=None, ctx=ctx, capture=True)
        return bank

    # -- denoising ------------------------------------------------------

    def denoise(
        self,
        z: torch.Tensor,
        t: torch.Tensor | int,
        bank: list[torch.Tensor] | None = None,
        pose_residual: torch.Tensor | None = None,
        ctx: torch.Tensor | None = None,
        motion_on: bool = False,
        clip_len: int = 1,
    ) -> torch.Tensor:
        """Noise prediction: the pose residual is added to the noisy latent
        before the trunk; each attention site runs spatial attention with
        the bank, cross attention over ctx, then (if motion_on) temporal
        attention across clips of ``clip_len`` frames."""
        if not torch.is_tensor(t):
            t = torch.full((z.shape[0],), int(t), dtype=torch.long, device=z.device)
        if (t < 0).any() or (t >= self.cfg.diffusion_steps).any():
            raise ValueError(
                f"denoise: timesteps must lie in [0, {self.cfg.diffusion_steps}), got {t.tolist()}"
            )
        if pose_residual is not None:
            if pose_residual.shape != z.shape:
                raise ValueError(
                    f"denoise: pose residual shape {tuple(pose_residual.shape)} "
                    f"!= latent shape {tuple(z.shape)}"
                )
            z = z + pose_residual
        return self.denoiser(
            z,
            t,
            bank=bank,
            ctx=ctx,
            temporal_stack=self.motion if motion_on else None,
            clip_len=clip_len,
        )

    # -- archive conversion ----------------------------------------------

    def to_archive(self, stage: int, seed: int, step: int = 0) -> ParameterArchive:
        groups = {
            g: {k: v.detach().clone() for k, v in self.group_module(g).state_dict().items()}
            for g in GROUPS
        }
        return ParameterArchive(groups=groups, stage=stage, config=self.cfg, seed=seed, step=step)

    def load_archive_weights(self, archive: ParameterArchive) -> None:
        for g in GROUPS:
            module = self.group_module(g)
            module.load_state_dict(archive.groups.get(g, {}), strict=True)

    @classmethod
    def from_archive(cls, archive: ParameterArchive) -> "SpriteModel":
        model = cls(archive.config)
        model.load_archive_weights(archive)
        return model
