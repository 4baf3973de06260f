"""Deterministic-capable DDIM update and the sampling timestep ladder."""

from __future__ import annotations

import torch

from .schedule import NoiseSchedule

__all__ = ["ddim_step", "ddim_timesteps"]


def ddim_step(
    x_t: torch.Tensor,
    eps_pred: torch.Tensor,
    t: int,
    t_prev: int,
    eta: float,
    sched: NoiseSchedule,
    rng: torch.Generator | None = None,
) -> torch.Tensor:
    """One reverse step from level t to level t_prev.

    Recovers the clean-signal estimate x0_hat from the noise prediction,
    then re-noises it to level t_prev.  ``t_prev == -1`` denotes the final
    decode and returns x0_hat itself.  eta == 0 is fully deterministic;
    eta > 0 injects fresh noise drawn from ``rng``.
    """
    if not (sched.steps > t > t_prev >= -1):
        raise ValueError(f"ddim_step: need T > t > t_prev >= -1, got t={t}, t_prev={t_prev}")
    ab_t = float(sched.alpha_bar[t])
    ab_prev = 1.0 if t_prev < 0 else float(sched.alpha_bar[t_prev])

    x0_hat = (x_t - (1.0 - ab_t) ** 0.5 * eps_pred) / ab_t**0.5
    sigma = eta * ((1.0 - ab_prev) / (1.0 - ab_t)) ** 0.5 * (1.0 - ab_t / ab_prev) ** 0.5
    direction = max(1.0 - ab_prev - sigma**2, 0.0) ** 0.5 * eps_pred
    x_prev = ab_prev**0.5 * x0_hat + direction
    if sigma > 0.0:
        if rng is None:
            raise ValueError("ddim_step: eta > 0 requires an RNG for the stochastic term")
        x_prev = x_prev + sigma * torch.randn(x_t.shape, generator=rng, dtype=x_t.dtype)
    return x_prev


def ddim_timesteps(total_steps: int, sampler_steps: int) -> list[int]:
    """Evenly spaced decreasing timestep ladder; always ends at 0.

    The returned list holds the levels at which the denoiser is queried;
    the final transition (from level 0) is the decode to x0_hat.
    """
    if not (total_steps >= sampler_steps >= 1):
        raise ValueError(
            f"ddim_timesteps: need total_steps >= sampler_steps >= 1, "
            f"got ({total_steps}, {sampler_steps})"
        )
    if sampler_steps == 1:
        return [total_steps - 1]
    grid = [
        round(i * (total_steps - 1) / (sampler_steps - 1)) for i in range(sampler_steps)
    ]
    ladder = sorted(set(grid), reverse=True)
    return ladder
