"""Run configuration: schema, validation, YAML round-trip.

The on-disk format is a hierarchical YAML document versioned with a
``schema_version`` integer (see ``spritegen/configs/default.yaml`` for the
shipped default).  ``load_config -> dump_config -> load_config`` is a
fixpoint: the round-trip yields an identical RunConfig.

Every validation failure raises :class:`ConfigError` whose message starts
with the name of the violated invariant.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import yaml

__all__ = ["RunConfig", "ConfigError", "load_config", "dump_config", "default_config"]

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Raised on parse failures and invariant violations."""


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration for one training/generation run.

    Invariants (checked in ``validate``, each reported by name):
      canvas_divisibility   H and W divisible by latent_downsample * 2**(levels-1)
      downsample_choice     latent_downsample in {1, 2, 4}
      channel_granularity   all UNet channel widths divisible by 4 (group norm)
      attention_levels      attention level indices within the UNet depth
      sampler_budget        diffusion_steps >= sampler_steps >= 1
      beta_range            0 < beta_start <= beta_end < 1
      eta_range             eta in [0, 1]
      clip_length           frames_per_clip >= 1
    """

    canvas_size: tuple[int, int] = (64, 64)
    latent_downsample: int = 1
    unet_channels: tuple[int, ...] = (32, 64, 96)
    attention_levels: tuple[int, ...] = (1, 2)
    context_dim: int = 64
    frames_per_clip: int = 4
    pose_thickness: int = 3

    diffusion_steps: int = 1000
    beta_start: float = 1e-4
    beta_end: float = 0.02
    sampler_steps: int = 50
    eta: float = 0.0

    lr_stage1: float = 2e-4
    lr_stage2: float = 1e-4
    stage1_steps: int = 3000
    stage2_steps: int = 500
    batch_size: int = 4
    ae_pretrain_steps: int = 500
    checkpoint_every: int = 500
    log_every: int = 10

    seed: int = 42
    num_threads: int = 1
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        self.validate()

    # -- derived geometry ------------------------------------------------

    @property
    def levels(self) -> int:
        return len(self.unet_channels)

    @property
    def latent_channels(self) -> int:
        # identity codec keeps the 3 RGB planes; the conv codec compresses to 4
        return 3 if self.latent_downsample == 1 else 4

    @property
    def latent_size(self) -> tuple[int, int]:
        h, w = self.canvas_size
        return (h // self.latent_downsample, w // self.latent_downsample)

    def validate(self) -> None:
        h, w = self.canvas_size
        if self.latent_downsample not in (1, 2, 4):
            raise ConfigError(
                f"downsample_choice: latent_downsample must be 1, 2 or 4, got {self.latent_downsample}"
            )
        if self.levels < 1:
            raise ConfigError("channel_granularity: unet_channels must be non-empty")
        grain = self.latent_downsample * 2 ** (self.levels - 1)
        if h % grain != 0 or w % grain != 0:
            raise ConfigError(
                f"canvas_divisibility: canvas {h}x{w} not divisible by "
                f"latent_downsample * 2^(levels-1) = {grain}"
            )
        for c in self.unet_channels:
            if c % 4 != 0 or c <= 0:
                raise ConfigError(f"channel_granularity: channel width {c} not a positive multiple of 4")
        for lvl in self.attention_levels:
            if not 0 <= lvl < self.levels:
                raise ConfigError(f"attention_levels: level {lvl} outside [0, {self.levels})")
        if tuple(sorted(set(self.attention_levels))) != tuple(self.attention_levels):
            raise ConfigError("attention_levels: indices must be sorted and unique")
        if not (self.diffusion_steps >= self.sampler_steps >= 1):
            raise ConfigError(
                f"sampler_budget: need diffusion_steps >= sampler_steps >= 1, "
                f"got T={self.diffusion_steps}, sampler_steps={self.sampler_steps}"
            )
        if not (0.0 < self.beta_start <= self.beta_end < 1.0):
            raise ConfigError(
                f"beta_range: need 0 < beta_start <= beta_end < 1, got ({self.beta_start}, {self.beta_end})"
            )
        if not (0.0 <= self.eta <= 1.0):
            raise ConfigError(f"eta_range: eta must lie in [0, 1], got {self.eta}")
        if self.frames_per_clip < 1:
            raise ConfigError(f"clip_length: frames_per_clip must be >= 1, got {self.frames_per_clip}")
        if self.context_dim < 1:
            raise ConfigError(f"context_dim: must be >= 1, got {self.context_dim}")
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(
                f"schema_version: expected {SCHEMA_VERSION}, got {self.schema_version}"
            )

    # -- (de)serialization -------------------------------------------------

    def to_nested(self) -> dict:
        """Nested dict mirroring the YAML layout."""
        return {
            "schema_version": self.schema_version,
            "seed": self.seed,
            "canvas": {"height": self.canvas_size[0], "width": self.canvas_size[1]},
            "latent": {"downsample": self.latent_downsample},
            "model": {
                "unet_channels": list(self.unet_channels),
                "attention_levels": list(self.attention_levels),
                "context_dim": self.context_dim,
                "frames_per_clip": self.frames_per_clip,
                "pose_thickness": self.pose_thickness,
            },
            "diffusion": {
                "steps": self.diffusion_steps,
                "beta_start": self.beta_start,
                "beta_end": self.beta_end,
            },
            "sampler": {"steps": self.sampler_steps, "eta": self.eta},
            "training": {
                "stage1": {
                    "learning_rate": self.lr_stage1,
                    "steps": self.stage1_steps,
                    "batch_size": self.batch_size,
                },
                "stage2": {"learning_rate": self.lr_stage2, "steps": self.stage2_steps},
                "ae_pretrain_steps": self.ae_pretrain_steps,
                "checkpoint_every": self.checkpoint_every,
                "log_every": self.log_every,
            },
            "runtime": {"num_threads": self.num_threads},
        }

    @classmethod
    def from_nested(cls, doc: dict) -> "RunConfig":
        try:
            canvas = doc.get("canvas", {})
            model = doc.get("model", {})
            diff = doc.get("diffusion", {})
            sampler = doc.get("sampler", {})
            training = doc.get("training", {})
            s1 = training.get("stage1", {})
            s2 = training.get("stage2", {})
            runtime = doc.get("runtime", {})
            return cls(
                canvas_size=(
                    int(canvas.get("height", 64)),
                    int(canvas.get("width", 64)),
                ),
                latent_downsample=int(doc.get("latent", {}).get("downsample", 1)),
                unet_channels=tuple(int(c) for c in model.get("unet_channels", (32, 64, 96))),
                attention_levels=tuple(int(l) for l in model.get("attention_levels", (1, 2))),
                context_dim=int(model.get("context_dim", 64)),
                frames_per_clip=int(model.get("frames_per_clip", 4)),
                pose_thickness=int(model.get("pose_thickness", 3)),
                diffusion_steps=int(diff.get("steps", 1000)),
                beta_start=float(diff.get("beta_start", 1e-4)),
                beta_end=float(diff.get("beta_end", 0.02)),
                sampler_steps=int(sampler.get("steps", 50)),
                eta=float(sampler.get("eta", 0.0)),
                lr_stage1=float(s1.get("learning_rate", 2e-4)),
                stage1_steps=int(s1.get("steps", 3000)),
                batch_size=int(s1.get("batch_size", 4)),
                lr_stage2=float(s2.get("learning_rate", 1e-4)),
                stage2_steps=int(s2.get("steps", 500)),
                ae_pretrain_steps=int(training.get("ae_pretrain_steps", 500)),
                checkpoint_every=int(training.get("checkpoint_every", 500)),
                log_every=int(training.get("log_every", 10)),
                seed=int(doc.get("seed", 42)),
                num_threads=int(runtime.get("num_threads", 1)),
                schema_version=int(doc.get("schema_version", SCHEMA_VERSION)),
            )
        except (TypeError, AttributeError) as exc:
            raise ConfigError(f"parse: malformed config document ({exc})") from exc

    def config_hash(self) -> str:
        """Stable content hash used to tie checkpoints to their config."""
        return hashlib.sha256(dumps_config(self).encode("utf-8")).hexdigest()


def dumps_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.to_nested(), sort_keys=True, default_flow_style=False)


def dump_config(cfg: RunConfig, path: str | Path) -> None:
    Path(path).write_text(dumps_config(cfg), encoding="utf-8")


def load_config(path: str | Path) -> RunConfig:
    """Load and validate a YAML config file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"parse: config file not found: {path}")
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"parse: invalid YAML in {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"parse: config root must be a mapping, got {type(doc).__name__}")
    return RunConfig.from_nested(doc)


def default_config() -> RunConfig:
    """The shipped default configuration (64x64 canvas, T=1000)."""
    with resources.files("spritegen.configs").joinpath("default.yaml").open("r") as fh:
        return RunConfig.from_nested(yaml.safe_load(fh))
