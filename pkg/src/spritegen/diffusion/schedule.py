"""Noise schedule and the forward (noising) process.

Linear beta schedule with the usual derived coefficient arrays, kept in
float64; consumers cast lookups to their working dtype.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

__all__ = ["NoiseSchedule", "make_schedule", "q_sample"]


@dataclass(frozen=True)
class NoiseSchedule:
    """Diffusion coefficients shared by training and sampling.

    betas are strictly positive and non-decreasing; the cumulative alpha
    product is strictly decreasing with alpha_bar[0] = 1 - beta[0].
    """

    steps: int
    betas: np.ndarray
    alphas: np.ndarray
    alpha_bar: np.ndarray

    def __post_init__(self):
        for arr in (self.betas, self.alphas, self.alpha_bar):
            arr.setflags(write=False)

    def signal_level(self, t: int) -> float:
        """sqrt(alpha_bar_t): scale applied to the clean signal at step t."""
        return float(np.sqrt(self.alpha_bar[t]))

    def noise_level(self, t: int) -> float:
        """sqrt(1 - alpha_bar_t): scale applied to the injected noise."""
        return float(np.sqrt(1.0 - self.alpha_bar[t]))


def make_schedule(steps: int, beta_start: float, beta_end: float) -> NoiseSchedule:
    """Linear schedule of ``steps`` betas from beta_start to beta_end."""
    if steps < 1:
        raise ValueError(f"make_schedule: steps must be >= 1, got {steps}")
    if not (0.0 < beta_start <= beta_end < 1.0):
        raise ValueError(
            f"make_schedule: need 0 < beta_start <= beta_end < 1, got ({beta_start}, {beta_end})"
        )
    if steps == 1:
        betas = np.array([beta_start], dtype=np.float64)
    else:
        betas = np.linspace(beta_start, beta_end, steps, dtype=np.float64)
    alphas = 1.0 - betas
    alpha_bar = np.cumprod(alphas)
    return NoiseSchedule(steps=steps, betas=betas, alphas=alphas, alpha_bar=alpha_bar)


def q_sample(
    x0: torch.Tensor, t: torch.Tensor | int, noise: torch.Tensor, sched: NoiseSchedule
) -> torch.Tensor:
    """Noise clean latents to step t: sqrt(ab_t)*x0 + sqrt(1-ab_t)*eps.

    ``t`` may be a scalar or a per-item tensor of shape (B,).
    """
    if noise.shape != x0.shape:
        raise ValueError(f"q_sample: noise shape {tuple(noise.shape)} != x0 shape {tuple(x0.shape)}")
    t_arr = torch.as_tensor(t, dtype=torch.long)
    if (t_arr < 0).any() or (t_arr >= sched.steps).any():
        raise ValueError(f"q_sample: t must lie in [0, {sched.steps}), got {t}")
    ab = torch.as_tensor(sched.alpha_bar[t_arr.cpu().numpy()], dtype=x0.dtype)
    while ab.dim() < x0.dim():
        ab = ab.unsqueeze(-1)
    return torch.sqrt(ab) * x0 + torch.sqrt(1.0 - ab) * noise
