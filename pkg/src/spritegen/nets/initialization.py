"""Deterministic parameter initialization.

Scheme (the stand-in for pretrained weights, which this build forbids):

  * conv / linear weights: N(0, (gain / sqrt(fan_in))^2), gain 1.0;
  * the denoiser's and reference encoder's output convs use gain 0.2 so a
    fresh model predicts near-zero noise;
  * the pose guider's final projection and every temporal-attention
    output projection are exactly zero (inert conditioning at init);
  * biases zero; norm layers weight 1, bias 0.

Each tensor draws from its own generator seeded by (seed, "init", group,
parameter name), so adding or reordering parameters never perturbs the
draws of existing ones.
"""

from __future__ import annotations

import torch
from torch import nn

from ..core.config import RunConfig
from ..core.seeding import stable_seed
from .archive import GROUPS, ParameterArchive
from .blocks import TemporalAttention
from .model import SpriteModel

__all__ = ["init_parameters", "build_model", "count_parameters"]

OUTPUT_GAIN = 0.2


def _fan_in(module: nn.Module) -> int:
    w = module.weight
    if isinstance(module, nn.Conv2d):
        return w.shape[1] * w.shape[2] * w.shape[3]
    return w.shape[1]


def _init_group(module: nn.Module, group: str, seed: int, zero_names: set[str],
                output_gain_names: set[str]) -> None:
    with torch.no_grad():
        for name, sub in module.named_modules():
            if isinstance(sub, (nn.Conv2d, nn.Linear)):
                if name in zero_names:
                    sub.weight.zero_()
                    if sub.bias is not None:
                        sub.bias.zero_()
                    continue
                gain = OUTPUT_GAIN if name in output_gain_names else 1.0
                gen = torch.Generator()
                gen.manual_seed(stable_seed(seed, "init", group, f"{name}.weight"))
                std = gain / _fan_in(sub) ** 0.5
                sub.weight.copy_(
                    torch.randn(sub.weight.shape, generator=gen, dtype=torch.float32) * std
                )
                if sub.bias is not None:
                    sub.bias.zero_()
            elif isinstance(sub, (nn.LayerNorm, nn.GroupNorm)):
                sub.weight.fill_(1.0)
                sub.bias.zero_()


def _zero_names(module: nn.Module) -> set[str]:
    """Module paths that must be exactly zero at init."""
    names = set()
    for name, sub in module.named_modules():
        if isinstance(sub, TemporalAttention):
            names.add(f"{name}.to_out" if name else "to_out")
    if hasattr(module, "proj") and isinstance(module, nn.Module):
        # the pose guider's final projection
        from .conditioning import PoseGuider

        if isinstance(module, PoseGuider):
            names.add("proj")
    return names


def build_model(cfg: RunConfig, seed: int) -> SpriteModel:
    """A SpriteModel carrying the deterministic init for (cfg, seed)."""
    model = SpriteModel(cfg)
    for group in GROUPS:
        module = model.group_module(group)
        output_gains = {"conv_out"} if group in ("denoiser", "referencenet") else set()
        _init_group(module, group, seed, _zero_names(module), output_gains)
    return model


def init_parameters(cfg: RunConfig, seed: int) -> ParameterArchive:
    """Allocate and initialize all parameter groups; stage 0 archive."""
    return build_model(cfg, seed).to_archive(stage=0, seed=seed)


def count_parameters(cfg: RunConfig) -> dict[str, int]:
    """Per-group and total parameter counts for a configuration."""
    model = SpriteModel(cfg)
    counts = {
        g: sum(p.numel() for p in model.group_module(g).parameters()) for g in GROUPS
    }
    counts["total"] = sum(counts.values())
    return counts
