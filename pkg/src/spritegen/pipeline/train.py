"""Two-stage training.

Stage 1 (pose-to-image) trains the denoiser, reference encoder, pose
guider, embedder and codec on single frames with motion disabled.  Stage
2 (pose-to-sprite) trains only the temporal modules on clips of
consecutive frames; every other group is frozen and leaves the stage
byte-identical.

Both stages append newline-delimited JSON loss records and emit periodic
checkpoints.  A non-finite loss aborts with the failing step index.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from pathlib import Path

import torch
import torch.nn.functional as F

from ..core.config import RunConfig
from ..core.seeding import SeedHub
from ..diffusion.schedule import make_schedule
from ..nets.archive import FROZEN_IN_STAGE2, ParameterArchive, save_archive
from ..nets.codec import ConvCodec
from ..nets.initialization import build_model
from ..nets.model import SpriteModel
from .loss import STAGE_TRAINABLE, compute_loss
from .tensors import SequenceTensors, TripletBatch

__all__ = ["TrainingDiverged", "LossLog", "train_stage1", "train_stage2",
           "train_autoencoder", "clip_start_range", "sample_clip"]


class TrainingDiverged(RuntimeError):
    """Loss became non-finite; carries the offending step index."""

    def __init__(self, step: int, loss: float):
        super().__init__(f"non-finite loss {loss} at step {step}")
        self.step = step


class LossLog:
    """Append-only newline-delimited loss records."""

    def __init__(self, path: str | Path | None):
        self.path = Path(path) if path is not None else None
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)

    def append(self, step: int, stage: int, loss: float) -> None:
        if self.path is None:
            return
        record = {"step": step, "stage": stage, "loss": loss, "wallclock": time.time()}
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record) + "\n")


@dataclass
class _Shuffler:
    """Permutation-epoch batch sampler over N items."""

    n: int
    batch_size: int
    gen: torch.Generator

    def __post_init__(self):
        self._queue = torch.empty(0, dtype=torch.long)

    def next_batch(self) -> torch.Tensor:
        while self._queue.numel() < self.batch_size:
            perm = torch.randperm(self.n, generator=self.gen)
            self._queue = torch.cat([self._queue, perm])
        idx, self._queue = self._queue[: self.batch_size], self._queue[self.batch_size :]
        return idx


def train_autoencoder(
    model: SpriteModel, frames: torch.Tensor, cfg: RunConfig, hub: SeedHub, steps: int
) -> list[float]:
    """Reconstruction pretraining for the conv codec (no-op for identity)."""
    if not isinstance(model.codec, ConvCodec) or steps <= 0:
        return []
    opt = torch.optim.Adam(model.codec.parameters(), lr=cfg.lr_stage1)
    shuffler = _Shuffler(frames.shape[0], min(cfg.batch_size, frames.shape[0]), hub.generator("shuffle.ae"))
    losses = []
    for _ in range(steps):
        batch = frames[shuffler.next_batch()]
        loss = F.mse_loss(model.codec(batch), batch)
        opt.zero_grad(set_to_none=True)
        loss.backward()
        opt.step()
        losses.append(float(loss.detach()))
    return losses


def _run_steps(
    model: SpriteModel,
    make_batch,
    optimizer: torch.optim.Optimizer,
    sched,
    loss_rng: torch.Generator,
    cfg: RunConfig,
    stage: int,
    clip_len: int,
    first_step: int,
    steps: int,
    log: LossLog,
    checkpoint_dir: Path | None,
    seed: int,
) -> None:
    for step in range(first_step, steps):
        batch = make_batch()
        loss = compute_loss(
            model, sched, batch, loss_rng, motion_on=(stage == 2), clip_len=clip_len
        )
        value = float(loss.detach())
        if not math.isfinite(value):
            raise TrainingDiverged(step, value)
        optimizer.zero_grad(set_to_none=True)
        loss.backward()
        optimizer.step()
        if (step + 1) % cfg.log_every == 0 or step + 1 == steps:
            log.append(step + 1, stage, value)
        if (
            checkpoint_dir is not None
            and cfg.checkpoint_every > 0
            and (step + 1) % cfg.checkpoint_every == 0
            and step + 1 < steps
        ):
            save_archive(
                model.to_archive(stage=stage, seed=seed, step=step + 1),
                checkpoint_dir / f"step_{step + 1:06d}",
            )


def train_stage1(
    data: TripletBatch,
    cfg: RunConfig,
    seed: int,
    out_dir: str | Path | None = None,
    steps: int | None = None,
    resume: ParameterArchive | None = None,
) -> ParameterArchive:
    """Pose-to-image training on independent triplets; returns a stage-1 archive."""
    if len(data) == 0:
        raise ValueError("train_stage1: empty training set")
    steps = cfg.stage1_steps if steps is None else steps
    hub = SeedHub(seed)
    out_dir = Path(out_dir) if out_dir is not None else None

    if resume is not None:
        if resume.stage != 1:
            raise ValueError(f"train_stage1: resume archive has stage {resume.stage}, expected 1")
        if resume.config.config_hash() != cfg.config_hash():
            raise ValueError("train_stage1: resume archive was trained under a different config")
        model = SpriteModel.from_archive(resume)
        first_step = resume.step
    else:
        model = build_model(cfg, seed)
        first_step = 0
        train_autoencoder(model, data.target, cfg, hub, cfg.ae_pretrain_steps)

    model.set_trainable(STAGE_TRAINABLE[1])
    sched = make_schedule(cfg.diffusion_steps, cfg.beta_start, cfg.beta_end)
    optimizer = torch.optim.Adam(model.parameters_of(STAGE_TRAINABLE[1]), lr=cfg.lr_stage1)
    shuffler = _Shuffler(len(data), min(cfg.batch_size, len(data)), hub.generator("shuffle.stage1"))
    # replaying the per-step RNG from the start keeps resumed runs aligned
    loss_rng = hub.generator("noise.stage1")
    log = LossLog(out_dir / "loss_log.jsonl" if out_dir else None)

    _run_steps(
        model, lambda: data.select(shuffler.next_batch()), optimizer, sched, loss_rng,
        cfg, stage=1, clip_len=1, first_step=first_step, steps=steps, log=log,
        checkpoint_dir=out_dir, seed=seed,
    )
    archive = model.to_archive(stage=1, seed=seed, step=steps)
    if out_dir is not None:
        save_archive(archive, out_dir / "final")
    return archive


def clip_start_range(sequence_length: int, clip_len: int) -> int:
    """Number of valid clip start positions (starts are 0..range-1)."""
    if sequence_length < clip_len:
        raise ValueError(
            f"sequence of {sequence_length} frames is shorter than clip length {clip_len}"
        )
    return sequence_length - clip_len + 1


def sample_clip(
    sequences: list[SequenceTensors], clip_len: int, gen: torch.Generator
) -> dict[str, torch.Tensor]:
    """Uniformly pick a sequence, then a window of clip_len consecutive frames."""
    seq = sequences[int(torch.randint(len(sequences), (1,), generator=gen))]
    start = int(torch.randint(clip_start_range(len(seq), clip_len), (1,), generator=gen))
    window = slice(start, start + clip_len)
    return {
        "reference": seq.reference.unsqueeze(0).expand(clip_len, -1, -1, -1),
        "pose": seq.poses[window],
        "target": seq.targets[window],
    }


def train_stage2(
    sequences: list[SequenceTensors],
    stage1: ParameterArchive,
    cfg: RunConfig,
    seed: int,
    out_dir: str | Path | None = None,
    steps: int | None = None,
    resume: ParameterArchive | None = None,
) -> ParameterArchive:
    """Motion-module training on clips; all stage-1 groups stay frozen."""
    if stage1.stage != 1:
        raise ValueError(f"train_stage2: expected a stage-1 archive, got stage {stage1.stage}")
    if cfg.config_hash() != stage1.config.config_hash():
        raise ValueError("train_stage2: config does not match the stage-1 archive")
    if not sequences:
        raise ValueError("train_stage2: empty sequence list")
    n = cfg.frames_per_clip
    for seq in sequences:
        if len(seq) < n:
            raise ValueError(
                f"train_stage2: sequence {seq.character_id}/{seq.action_name} has "
                f"{len(seq)} frames, need at least {n}"
            )
    steps = cfg.stage2_steps if steps is None else steps
    hub = SeedHub(seed)
    out_dir = Path(out_dir) if out_dir is not None else None

    if resume is not None:
        if resume.stage != 2:
            raise ValueError(f"train_stage2: resume archive has stage {resume.stage}, expected 2")
        if resume.config.config_hash() != cfg.config_hash():
            raise ValueError("train_stage2: resume archive was trained under a different config")
        model = SpriteModel.from_archive(resume)
        first_step = resume.step
    else:
        model = SpriteModel.from_archive(stage1)
        first_step = 0

    model.set_trainable(STAGE_TRAINABLE[2])
    sched = make_schedule(cfg.diffusion_steps, cfg.beta_start, cfg.beta_end)
    optimizer = torch.optim.Adam(model.parameters_of(STAGE_TRAINABLE[2]), lr=cfg.lr_stage2)
    clip_gen = hub.generator("shuffle.stage2")
    loss_rng = hub.generator("noise.stage2")
    log = LossLog(out_dir / "loss_log.jsonl" if out_dir else None)

    _run_steps(
        model, lambda: sample_clip(sequences, n, clip_gen), optimizer, sched, loss_rng,
        cfg, stage=2, clip_len=n, first_step=first_step, steps=steps, log=log,
        checkpoint_dir=out_dir, seed=seed,
    )
    archive = model.to_archive(stage=2, seed=seed, step=steps)
    for group in FROZEN_IN_STAGE2:
        if archive.group_bytes(group) != stage1.group_bytes(group):
            raise RuntimeError(f"train_stage2: frozen group {group!r} was modified")
    if out_dir is not None:
        save_archive(archive, out_dir / "final")
    return archive
