"""Latent codecs.

The codec maps [0, 1] RGB frames to the tensors the diffusion operates
on.  The default identity codec diffuses in pixel space (latent == image,
bit-exact round trip).  The conv codec compresses to a 4-channel latent
at the configured downsample factor and is trained as a plain
autoencoder before use.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

from ..core.config import RunConfig

__all__ = ["IdentityCodec", "ConvCodec", "build_codec"]


class IdentityCodec(nn.Module):
    """Pixel-space diffusion: encode and decode are the identity."""

    def encode(self, img: torch.Tensor) -> torch.Tensor:
        return img

    def decode(self, z: torch.Tensor) -> torch.Tensor:
        return z

    def forward(self, img: torch.Tensor) -> torch.Tensor:
        return img


class ConvCodec(nn.Module):
    """Small conv autoencoder to a spatially downsampled 4-channel latent."""

    WIDTH = 32

    def __init__(self, cfg: RunConfig):
        super().__init__()
        if cfg.latent_downsample == 1:
            raise ValueError("ConvCodec: use IdentityCodec for downsample 1")
        n_strided = {2: 1, 4: 2}[cfg.latent_downsample]
        w = self.WIDTH
        self.enc_in = nn.Conv2d(3, w, 3, padding=1)
        self.enc_down = nn.ModuleList(
            [nn.Conv2d(w, w, 3, stride=2, padding=1) for _ in range(n_strided)]
        )
        self.enc_out = nn.Conv2d(w, cfg.latent_channels, 3, padding=1)
        self.dec_in = nn.Conv2d(cfg.latent_channels, w, 3, padding=1)
        self.dec_up = nn.ModuleList([nn.Conv2d(w, w, 3, padding=1) for _ in range(n_strided)])
        self.dec_out = nn.Conv2d(w, 3, 3, padding=1)

    def encode(self, img: torch.Tensor) -> torch.Tensor:
        x = F.silu(self.enc_in(2.0 * img - 1.0))
        for conv in self.enc_down:
            x = F.silu(conv(x))
        return self.enc_out(x)

    def decode(self, z: torch.Tensor) -> torch.Tensor:
        x = F.silu(self.dec_in(z))
        for conv in self.dec_up:
            x = F.silu(conv(F.interpolate(x, scale_factor=2.0, mode="nearest")))
        return 0.5 * self.dec_out(x) + 0.5

    def forward(self, img: torch.Tensor) -> torch.Tensor:
        return self.decode(self.encode(img))


def build_codec(cfg: RunConfig) -> nn.Module:
    return IdentityCodec() if cfg.latent_downsample == 1 else ConvCodec(cfg)
