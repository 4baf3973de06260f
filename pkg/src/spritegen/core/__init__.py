from .config import RunConfig, ConfigError, load_config, dump_config, default_config
from .seeding import SeedHub, seed_all, stable_seed, use_single_thread
from .types import (
    KEYPOINT_NAMES,
    BONES,
    ReferenceImage,
    PoseKeypoints,
    PoseImage,
    SpriteFrame,
    ActionSequence,
)
from .imageio import load_rgba, load_rgb, save_image

__all__ = [
    "RunConfig", "ConfigError", "load_config", "dump_config", "default_config",
    "SeedHub", "seed_all", "stable_seed", "use_single_thread",
    "KEYPOINT_NAMES", "BONES",
    "ReferenceImage", "PoseKeypoints", "PoseImage", "SpriteFrame", "ActionSequence",
    "load_rgba", "load_rgb", "save_image",
]
