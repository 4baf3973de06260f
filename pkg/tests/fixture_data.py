"""Procedural fixture data: characters, poses, and dataset trees.

Sprites are deterministic functions of their pose: a character is a
stick figure with per-character colors, limb thickness and a head disc,
rendered over a transparent background.  That makes tiny overfit
datasets genuinely learnable (pose in, appearance-consistent frame out).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from spritegen.core.seeding import stable_seed
from spritegen.core.types import BONES, PoseKeypoints
from spritegen.core.imageio import save_image
from spritegen.data.pose_io import save_pose
from spritegen.data.raster import _paint_segment

CANVAS = (64, 64)

# joint template for a standing figure on a 64x64 canvas
_TEMPLATE = np.array([
    [32, 14], [32, 22],
    [26, 23], [23, 30], [21, 37],
    [38, 23], [41, 30], [43, 37],
    [28, 38], [27, 46], [26, 54],
    [36, 38], [37, 46], [38, 54],
    [30, 12], [34, 12], [28, 13], [36, 13],
], dtype=np.float64)

_WIGGLE = np.array([2, 1, 2, 4, 5, 2, 4, 5, 2, 4, 5, 2, 4, 5, 1, 1, 1, 1], dtype=np.float64)


def standing_pose(canvas=CANVAS) -> PoseKeypoints:
    pts = np.concatenate([_TEMPLATE, np.ones((18, 1))], axis=1)
    return PoseKeypoints(points=pts, canvas=canvas)


def pose_variant(tag: str, canvas=CANVAS) -> PoseKeypoints:
    """Deterministic jiggled pose; same tag, same pose."""
    rng = np.random.RandomState(stable_seed("pose", tag) % (2**32))
    offsets = rng.uniform(-1.0, 1.0, size=(18, 2)) * _WIGGLE[:, None]
    pts = _TEMPLATE + offsets
    h, w = canvas
    pts[:, 0] = np.clip(pts[:, 0], 1, w - 2)
    pts[:, 1] = np.clip(pts[:, 1], 1, h - 2)
    return PoseKeypoints(points=np.concatenate([pts, np.ones((18, 1))], axis=1), canvas=canvas)


def character_style(character_id: str) -> dict:
    rng = np.random.RandomState(stable_seed("style", character_id) % (2**32))

    def color():
        c = rng.uniform(0.15, 1.0, size=3)
        c[rng.randint(3)] = rng.uniform(0.0, 0.25)  # keep it saturated
        return c

    return {"torso": color(), "limbs": color(), "head": color(), "thickness": 4 + rng.randint(3)}


# bones 0..5 arms, 6..11 legs, 12..16 head/face
_TORSO_BONES = {0, 1, 6, 9}


def render_character(kp: PoseKeypoints, style: dict) -> np.ndarray:
    """RGBA sprite of the styled figure in the given pose."""
    h, w = kp.canvas
    rgb = np.zeros((h, w, 3), dtype=np.float64)
    painted = np.zeros((h, w, 3), dtype=np.float64)
    pts = kp.points
    radius = style["thickness"] / 2.0
    for i, (a, b) in enumerate(BONES):
        color = style["torso"] if i in _TORSO_BONES else style["limbs"]
        _paint_segment(rgb, pts[a, :2], pts[b, :2], radius, color)
        _paint_segment(painted, pts[a, :2], pts[b, :2], radius, np.ones(3))
    nose = pts[0, :2]
    _paint_segment(rgb, nose, nose, 6.0, style["head"])
    _paint_segment(painted, nose, nose, 6.0, np.ones(3))
    alpha = painted[..., :1]
    return np.concatenate([rgb, alpha], axis=2)


def write_sequence(seq_dir: Path, character_id: str, action: str, n_frames: int,
                   style: dict, canvas=CANVAS) -> None:
    seq_dir.mkdir(parents=True, exist_ok=True)
    for k in range(n_frames):
        kp = pose_variant(f"{character_id}/{action}/{k}", canvas)
        save_pose(kp, seq_dir / f"pose_{k}.json")
        save_image(render_character(kp, style), seq_dir / f"frame_{k}.png")


def build_fixture_dataset(
    root: str | Path,
    character_ids: list[str],
    actions: list[str],
    frames_per_action: int = 4,
    canvas=CANVAS,
) -> Path:
    """A complete dataset tree with reference images, frames and poses."""
    root = Path(root)
    for cid in character_ids:
        style = character_style(cid)
        char_dir = root / cid
        char_dir.mkdir(parents=True, exist_ok=True)
        save_image(render_character(standing_pose(canvas), style), char_dir / "reference.png")
        for action in actions:
            write_sequence(char_dir / action, cid, action, frames_per_action, style, canvas)
    return root


def build_paper_scale_tree(root: str | Path) -> Path:
    """A tree mirroring the reported inventory: 16 characters, 75
    sequences, 619 triplets, splitting 11/5 characters into 463/156.

    Image payloads are shared tiny placeholders; only the structure
    matters for manifest tests.
    """
    root = Path(root)
    png = _tiny_png_bytes()
    pose_json = _tiny_pose_json()

    def sequence_lengths(n_seqs: int, total: int) -> list[int]:
        base = total // n_seqs
        extra = total - base * n_seqs
        return [base + 1] * extra + [base] * (n_seqs - extra)

    train_ids = [f"train_{i:02d}" for i in range(11)]
    test_ids = [f"test_{i:02d}" for i in range(5)]

    # 55 train sequences / 463 triplets, 20 test sequences / 156 triplets
    train_lengths = sequence_lengths(55, 463)
    test_lengths = sequence_lengths(20, 156)

    def write_character(cid: str, lengths: list[int]) -> None:
        char_dir = root / cid
        char_dir.mkdir(parents=True, exist_ok=True)
        (char_dir / "reference.png").write_bytes(png)
        for s, n in enumerate(lengths):
            seq_dir = char_dir / f"act_{s}"
            seq_dir.mkdir(exist_ok=True)
            for k in range(n):
                (seq_dir / f"frame_{k}.png").write_bytes(png)
                (seq_dir / f"pose_{k}.json").write_text(pose_json)

    for i, cid in enumerate(train_ids):
        write_character(cid, train_lengths[i * 5 : (i + 1) * 5])
    for i, cid in enumerate(test_ids):
        write_character(cid, test_lengths[i * 4 : (i + 1) * 4])
    return root


def _tiny_png_bytes() -> bytes:
    import io

    from PIL import Image

    buf = io.BytesIO()
    Image.new("RGBA", (4, 4), (0, 0, 0, 0)).save(buf, format="PNG")
    return buf.getvalue()


def _tiny_pose_json() -> str:
    import json

    from spritegen.core.types import KEYPOINT_NAMES

    return json.dumps({
        "schema_version": 1,
        "canvas": {"height": 4, "width": 4},
        "points": [
            {"name": name, "x": 1.0, "y": 1.0, "visible": False} for name in KEYPOINT_NAMES
        ],
    })
