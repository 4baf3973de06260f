from .ddim import ddim_step, ddim_timesteps
from .sampling import sample_latents, sample_sequence
from .schedule import NoiseSchedule, make_schedule, q_sample

__all__ = [
    "ddim_step", "ddim_timesteps",
    "sample_latents", "sample_sequence",
    "NoiseSchedule", "make_schedule", "q_sample",
]
