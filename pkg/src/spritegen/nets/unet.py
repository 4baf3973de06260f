"""The conditional UNet trunk.

One class serves two roles: as the denoiser it consumes reference tokens
at every attention site, and as the reference encoder (a twin with its
own parameters) it runs with no bank and *exports* the token map of each
site instead.  Both roles traverse the same site order, so an exported
bank lines up one-to-one with the consuming sites.

Inputs arrive in the codec's latent range; the trunk remaps to [-1, 1]
internally (affine at the module boundary).
"""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

from ..core.config import RunConfig
from .blocks import GROUPNORM_GROUPS, AttentionSite, ResBlock, sinusoidal_embedding

__all__ = ["CondUNet", "site_plan", "site_channels", "site_token_counts"]


def site_plan(cfg: RunConfig) -> list[tuple[str, int]]:
    """Attention-site traversal order: down path, middle, up path."""
    attn = list(cfg.attention_levels)
    deepest = cfg.levels - 1
    return (
        [("down", lvl) for lvl in attn]
        + [("mid", deepest)]
        + [("up", lvl) for lvl in reversed(attn)]
    )


def site_channels(cfg: RunConfig) -> list[int]:
    return [cfg.unet_channels[lvl] for _, lvl in site_plan(cfg)]


def site_token_counts(cfg: RunConfig) -> list[int]:
    h, w = cfg.latent_size
    return [(h >> lvl) * (w >> lvl) for _, lvl in site_plan(cfg)]


class CondUNet(nn.Module):
    def __init__(self, cfg: RunConfig):
        super().__init__()
        ch = cfg.unet_channels
        self.cfg = cfg
        self.temb_dim = 4 * ch[0]

        self.temb_mlp = nn.Sequential(
            nn.Linear(ch[0], self.temb_dim), nn.SiLU(), nn.Linear(self.temb_dim, self.temb_dim)
        )
        self.conv_in = nn.Conv2d(cfg.latent_channels, ch[0], 3, padding=1)

        self.down_res = nn.ModuleList(
            [ResBlock(ch[i], ch[i], self.temb_dim) for i in range(len(ch))]
        )
        self.down_sites = nn.ModuleDict(
            {str(lvl): AttentionSite(ch[lvl], cfg.context_dim) for lvl in cfg.attention_levels}
        )
        self.downs = nn.ModuleList(
            [nn.Conv2d(ch[i], ch[i + 1], 3, stride=2, padding=1) for i in range(len(ch) - 1)]
        )

        self.mid_res1 = ResBlock(ch[-1], ch[-1], self.temb_dim)
        self.mid_site = AttentionSite(ch[-1], cfg.context_dim)
        self.mid_res2 = ResBlock(ch[-1], ch[-1], self.temb_dim)

        self.up_res = nn.ModuleList(
            [ResBlock(2 * ch[i], ch[i], self.temb_dim) for i in range(len(ch))]
        )
        self.up_sites = nn.ModuleDict(
            {str(lvl): AttentionSite(ch[lvl], cfg.context_dim) for lvl in cfg.attention_levels}
        )
        self.ups = nn.ModuleList(
            [nn.Conv2d(ch[i], ch[i - 1], 3, padding=1) for i in range(1, len(ch))]
        )

        self.out_norm = nn.GroupNorm(GROUPNORM_GROUPS, ch[0])
        self.conv_out = nn.Conv2d(ch[0], cfg.latent_channels, 3, padding=1)

    @property
    def n_sites(self) -> int:
        return len(site_plan(self.cfg))

    def forward(
        self,
        z: torch.Tensor,
        t: torch.Tensor,
        bank: list[torch.Tensor] | None = None,
        ctx: torch.Tensor | None = None,
        temporal_stack: nn.ModuleList | None = None,
        clip_len: int = 1,
        capture: bool = False,
    ) -> torch.Tensor | tuple[torch.Tensor, list[torch.Tensor]]:
        """Predict noise for latents ``z`` at timesteps ``t``.

        bank: one token map per attention site (traversal order), or None.
        temporal_stack: one temporal module per site, or None (motion off).
        capture: additionally return this pass's per-site token maps.
        """
        if bank is not None and len(bank) != self.n_sites:
            raise ValueError(f"CondUNet: bank has {len(bank)} entries, expected {self.n_sites}")
        cfg = self.cfg
        h, w = cfg.latent_size
        if z.dim() != 4 or z.shape[1:] != (cfg.latent_channels, h, w):
            raise ValueError(
                f"CondUNet: latent shape {tuple(z.shape)} does not match "
                f"(B, {cfg.latent_channels}, {h}, {w})"
            )

        temb = self.temb_mlp(sinusoidal_embedding(t.to(z.dtype), cfg.unet_channels[0]))

        site_idx = 0
        captured: list[torch.Tensor] = []

        def run_site(site: AttentionSite, x: torch.Tensor) -> torch.Tensor:
            nonlocal site_idx
            entry = bank[site_idx] if bank is not None else None
            temporal = temporal_stack[site_idx] if temporal_stack is not None else None
            x, grabbed = site(x, entry, ctx, temporal, clip_len, capture)
            if capture:
                captured.append(grabbed)
            site_idx += 1
            return x

        x = self.conv_in(2.0 * z - 1.0)
        skips = []
        for lvl in range(cfg.levels):
            if lvl > 0:
                x = self.downs[lvl - 1](x)
            x = self.down_res[lvl](x, temb)
            if str(lvl) in self.down_sites:
                x = run_site(self.down_sites[str(lvl)], x)
            skips.append(x)

        x = self.mid_res1(x, temb)
        x = run_site(self.mid_site, x)
        x = self.mid_res2(x, temb)

        for lvl in reversed(range(cfg.levels)):
            x = torch.cat([x, skips[lvl]], dim=1)
            x = self.up_res[lvl](x, temb)
            if str(lvl) in self.up_sites:
                x = run_site(self.up_sites[str(lvl)], x)
            if lvl > 0:
                x = self.ups[lvl - 1](F.interpolate(x, scale_factor=2.0, mode="nearest"))

        eps = self.conv_out(F.silu(self.out_norm(x)))
        if capture:
            return eps, captured
        return eps
