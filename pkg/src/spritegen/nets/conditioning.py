"""Conditioning networks: pose guider, image embedder, temporal stack."""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

from ..core.config import RunConfig
from .blocks import TemporalAttention
from .unet import site_channels

__all__ = ["PoseGuider", "ImageEmbedder", "MotionStack"]


class PoseGuider(nn.Module):
    """Encode a rasterized pose into a latent-resolution residual.

    Four conv layers whose strides bridge canvas resolution to latent
    resolution, then a 1x1 projection that starts at exact zero: pose
    conditioning is a no-op until training turns it on.
    """

    WIDTHS = (16, 32, 64, 64)

    def __init__(self, cfg: RunConfig):
        super().__init__()
        n_strided = {1: 0, 2: 1, 4: 2}[cfg.latent_downsample]
        layers = []
        in_ch = 3
        for i, width in enumerate(self.WIDTHS):
            stride = 2 if i < n_strided else 1
            layers.append(nn.Conv2d(in_ch, width, 3, stride=stride, padding=1))
            in_ch = width
        self.convs = nn.ModuleList(layers)
        self.proj = nn.Conv2d(in_ch, cfg.latent_channels, 1)
        nn.init.zeros_(self.proj.weight)
        nn.init.zeros_(self.proj.bias)

    def forward(self, pose: torch.Tensor) -> torch.Tensor:
        x = 2.0 * pose - 1.0
        for conv in self.convs:
            x = F.silu(conv(x))
        return self.proj(x)


class ImageEmbedder(nn.Module):
    """Small trainable conv encoder for the cross-attention context.

    Emits one context token per image; a pretrained feature extractor can
    be substituted behind the same call shape.
    """

    WIDTHS = (16, 32, 64)

    def __init__(self, cfg: RunConfig):
        super().__init__()
        layers = []
        in_ch = 3
        for width in self.WIDTHS:
            layers.append(nn.Conv2d(in_ch, width, 3, stride=2, padding=1))
            in_ch = width
        self.convs = nn.ModuleList(layers)
        self.proj = nn.Linear(in_ch, cfg.context_dim)

    def forward(self, img: torch.Tensor) -> torch.Tensor:
        x = 2.0 * img - 1.0
        for conv in self.convs:
            x = F.silu(conv(x))
        pooled = x.mean(dim=(2, 3))
        return self.proj(pooled)[:, None, :]


class MotionStack(nn.Module):
    """One temporal-attention module per UNet attention site."""

    def __init__(self, cfg: RunConfig, use_posenc: bool = True):
        super().__init__()
        self.sites = nn.ModuleList(
            [TemporalAttention(c, use_posenc) for c in site_channels(cfg)]
        )

    def __len__(self) -> int:
        return len(self.sites)

    def __getitem__(self, idx: int) -> TemporalAttention:
        return self.sites[idx]
