from .composite import WHITE, composite_background
from .manifest import (
    DatasetError,
    Manifest,
    SplitSpec,
    Triplet,
    build_manifest,
    load_manifest,
    load_split,
    save_manifest,
    save_split,
    split_by_character,
)
from .pose_io import load_pose, save_pose
from .raster import PALETTE, bone_color, joint_color, rasterize_pose
from .sheets import pack_sprite_sheet, slice_sprite_sheet

__all__ = [
    "WHITE", "composite_background",
    "DatasetError", "Manifest", "SplitSpec", "Triplet",
    "build_manifest", "load_manifest", "save_manifest",
    "load_split", "save_split", "split_by_character",
    "load_pose", "save_pose",
    "PALETTE", "bone_color", "joint_color", "rasterize_pose",
    "pack_sprite_sheet", "slice_sprite_sheet",
]
