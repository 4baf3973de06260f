from .archive import (
    ARCHIVE_SCHEMA_VERSION,
    FROZEN_IN_STAGE2,
    GROUPS,
    ArchiveError,
    ParameterArchive,
    load_archive,
    save_archive,
)
from .blocks import (
    AttentionSite,
    ResBlock,
    TemporalAttention,
    attention_weights,
    frame_encoding,
    scaled_dot_attention,
    sinusoidal_embedding,
    spatial_attention,
)
from .codec import ConvCodec, IdentityCodec, build_codec
from .conditioning import ImageEmbedder, MotionStack, PoseGuider
from .initialization import build_model, count_parameters, init_parameters
from .model import SpriteModel
from .unet import CondUNet, site_channels, site_plan, site_token_counts

__all__ = [
    "ARCHIVE_SCHEMA_VERSION", "FROZEN_IN_STAGE2", "GROUPS",
    "ArchiveError", "ParameterArchive", "load_archive", "save_archive",
    "AttentionSite", "ResBlock", "TemporalAttention",
    "attention_weights", "frame_encoding", "scaled_dot_attention",
    "sinusoidal_embedding", "spatial_attention",
    "ConvCodec", "IdentityCodec", "build_codec",
    "ImageEmbedder", "MotionStack", "PoseGuider",
    "build_model", "count_parameters", "init_parameters",
    "SpriteModel",
    "CondUNet", "site_channels", "site_plan", "site_token_counts",
]
