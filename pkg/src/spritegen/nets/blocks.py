"""Building blocks shared by the denoiser and the reference encoder.

All attention here is single-head scaled dot-product.  The blocks follow
the pre-norm residual convention, and the two conditioning pathways that
must be inert at initialization (pose residual, temporal attention) get
their output projections zeroed at construction.
"""

from __future__ import annotations

import math

import torch
import torch.nn.functional as F
from torch import nn

__all__ = [
    "sinusoidal_embedding",
    "frame_encoding",
    "attention_weights",
    "scaled_dot_attention",
    "spatial_attention",
    "ResBlock",
    "AttentionSite",
    "TemporalAttention",
]

GROUPNORM_GROUPS = 4


def sinusoidal_embedding(t: torch.Tensor, dim: int) -> torch.Tensor:
    """Classic sin/cos embedding of scalar positions; ``dim`` must be even."""
    if dim % 2 != 0:
        raise ValueError(f"sinusoidal_embedding: dim must be even, got {dim}")
    half = dim // 2
    denom = max(half - 1, 1)
    freqs = torch.exp(
        -math.log(10000.0) * torch.arange(half, dtype=t.dtype, device=t.device) / denom
    )
    angles = t[..., None] * freqs
    return torch.cat([torch.sin(angles), torch.cos(angles)], dim=-1)


def frame_encoding(n: int, dim: int, dtype: torch.dtype, device=None) -> torch.Tensor:
    """Per-frame position encoding of shape (n, dim)."""
    pos = torch.arange(n, dtype=dtype, device=device)
    return sinusoidal_embedding(pos, dim)


def attention_weights(q: torch.Tensor, k: torch.Tensor) -> torch.Tensor:
    """Softmax attention matrix (rows sum to one)."""
    scale = q.shape[-1] ** -0.5
    return torch.softmax(q @ k.transpose(-2, -1) * scale, dim=-1)


def scaled_dot_attention(q: torch.Tensor, k: torch.Tensor, v: torch.Tensor) -> torch.Tensor:
    return attention_weights(q, k) @ v


def spatial_attention(
    x: torch.Tensor,
    bank_entry: torch.Tensor | None,
    to_q: nn.Linear,
    to_k: nn.Linear,
    to_v: nn.Linear,
    to_out: nn.Linear,
) -> torch.Tensor:
    """Self-attention whose keys/values may be augmented with reference tokens.

    Queries come from ``x`` alone; keys and values come from the token-axis
    concatenation [x ; bank_entry].  The output keeps x's token count.  With
    ``bank_entry=None`` this is exactly standard self-attention.
    """
    if bank_entry is None:
        kv = x
    else:
        if bank_entry.shape[-1] != x.shape[-1]:
            raise ValueError(
                f"spatial_attention: channel width mismatch, tokens {x.shape[-1]} "
                f"vs bank {bank_entry.shape[-1]}"
            )
        kv = torch.cat([x, bank_entry.expand(x.shape[0], -1, -1)], dim=-2)
    return to_out(scaled_dot_attention(to_q(x), to_k(kv), to_v(kv)))


class ResBlock(nn.Module):
    """GroupNorm conv block with timestep conditioning and a residual skip."""

    def __init__(self, in_channels: int, out_channels: int, temb_dim: int):
        super().__init__()
        self.norm1 = nn.GroupNorm(GROUPNORM_GROUPS, in_channels)
        self.conv1 = nn.Conv2d(in_channels, out_channels, 3, padding=1)
        self.temb_proj = nn.Linear(temb_dim, out_channels)
        self.norm2 = nn.GroupNorm(GROUPNORM_GROUPS, out_channels)
        self.conv2 = nn.Conv2d(out_channels, out_channels, 3, padding=1)
        self.skip = (
            nn.Conv2d(in_channels, out_channels, 1) if in_channels != out_channels else nn.Identity()
        )

    def forward(self, x: torch.Tensor, temb: torch.Tensor) -> torch.Tensor:
        h = self.conv1(F.silu(self.norm1(x)))
        h = h + self.temb_proj(F.silu(temb))[:, :, None, None]
        h = self.conv2(F.silu(self.norm2(h)))
        return h + self.skip(x)


class AttentionSite(nn.Module):
    """One attention station of the UNet trunk.

    Runs, in order: spatial attention (optionally consuming reference
    tokens), cross-attention over the image-context tokens, and an
    optional caller-supplied temporal module.  When ``capture`` is set,
    returns the normalized token map that a twin network would consume as
    reference keys/values at this site.
    """

    def __init__(self, channels: int, context_dim: int):
        super().__init__()
        self.channels = channels
        self.norm_spatial = nn.LayerNorm(channels)
        self.to_q = nn.Linear(channels, channels)
        self.to_k = nn.Linear(channels, channels)
        self.to_v = nn.Linear(channels, channels)
        self.to_out = nn.Linear(channels, channels)
        self.norm_cross = nn.LayerNorm(channels)
        self.cross_q = nn.Linear(channels, channels)
        self.cross_k = nn.Linear(context_dim, channels)
        self.cross_v = nn.Linear(context_dim, channels)
        self.cross_out = nn.Linear(channels, channels)

    def forward(
        self,
        x: torch.Tensor,
        bank_entry: torch.Tensor | None = None,
        ctx: torch.Tensor | None = None,
        temporal: "TemporalAttention | None" = None,
        clip_len: int = 1,
        capture: bool = False,
    ) -> tuple[torch.Tensor, torch.Tensor | None]:
        b, c, h, w = x.shape
        tokens = x.permute(0, 2, 3, 1).reshape(b, h * w, c)

        # captured tokens stay on the autograd graph: during stage-1 training
        # the reference encoder learns only through what it exports here
        normed = self.norm_spatial(tokens)
        captured = normed if capture else None
        tokens = tokens + spatial_attention(
            normed, bank_entry, self.to_q, self.to_k, self.to_v, self.to_out
        )

        if ctx is not None:
            normed = self.norm_cross(tokens)
            tokens = tokens + self.cross_out(
                scaled_dot_attention(self.cross_q(normed), self.cross_k(ctx), self.cross_v(ctx))
            )

        if temporal is not None:
            tokens = temporal(tokens, clip_len)

        return tokens.reshape(b, h, w, c).permute(0, 3, 1, 2), captured


class TemporalAttention(nn.Module):
    """Attention along the frame axis, independent per spatial location.

    Residual with a zero-initialized output projection, so a freshly built
    module is exactly the identity; training moves it away from that.
    """

    def __init__(self, channels: int, use_posenc: bool = True):
        super().__init__()
        self.channels = channels
        self.use_posenc = use_posenc
        self.norm = nn.LayerNorm(channels)
        self.to_q = nn.Linear(channels, channels)
        self.to_k = nn.Linear(channels, channels)
        self.to_v = nn.Linear(channels, channels)
        self.to_out = nn.Linear(channels, channels)
        nn.init.zeros_(self.to_out.weight)
        nn.init.zeros_(self.to_out.bias)

    def forward(
        self, tokens: torch.Tensor, clip_len: int, use_posenc: bool | None = None
    ) -> torch.Tensor:
        b, l, c = tokens.shape
        if clip_len < 1 or b % clip_len != 0:
            raise ValueError(
                f"TemporalAttention: batch {b} not divisible into clips of length {clip_len}"
            )
        posenc = self.use_posenc if use_posenc is None else use_posenc
        clips = b // clip_len
        seq = (
            tokens.reshape(clips, clip_len, l, c)
            .permute(0, 2, 1, 3)
            .reshape(clips * l, clip_len, c)
        )
        h = self.norm(seq)
        if posenc:
            h = h + frame_encoding(clip_len, c, dtype=h.dtype, device=h.device)
        out = self.to_out(scaled_dot_attention(self.to_q(h), self.to_k(h), self.to_v(h)))
        seq = seq + out
        return (
            seq.reshape(clips, l, clip_len, c)
            .permute(0, 2, 1, 3)
            .reshape(b, l, c)
        )
