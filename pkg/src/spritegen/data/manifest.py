"""Dataset manifest: inventory of (reference, pose, target) triplets.

Expected tree layout::

    root/<character_id>/reference.png
    root/<character_id>/<action>/frame_<k>.png
    root/<character_id>/<action>/pose_<k>.json

The manifest is a single versioned JSON document with recomputed counts
and deterministic ordering (lexicographic by character, then action, then
frame index), so two builds over the same tree serialize byte-identically.
Splits are at the character level: every sequence of a character lands
wholly on one side.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

__all__ = [
    "MANIFEST_SCHEMA_VERSION",
    "DatasetError",
    "Sequence",
    "Character",
    "Manifest",
    "SplitSpec",
    "Triplet",
    "build_manifest",
    "save_manifest",
    "load_manifest",
    "split_by_character",
    "save_split",
    "load_split",
]

MANIFEST_SCHEMA_VERSION = 1

_FRAME_RE = re.compile(r"^frame_(\d+)\.png$")


class DatasetError(ValueError):
    """Raised when the dataset tree or a split violates its contract."""


@dataclass(frozen=True)
class Sequence:
    action_name: str
    frame_paths: tuple[str, ...]
    pose_paths: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.frame_paths)


@dataclass(frozen=True)
class Character:
    character_id: str
    reference_frame_path: str
    sequences: tuple[Sequence, ...]


@dataclass(frozen=True)
class Manifest:
    characters: tuple[Character, ...]
    root: str

    @property
    def counts(self) -> dict:
        return {
            "characters": len(self.characters),
            "sequences": sum(len(c.sequences) for c in self.characters),
            "triplets": sum(len(s) for c in self.characters for s in c.sequences),
        }

    @property
    def character_ids(self) -> set[str]:
        return {c.character_id for c in self.characters}


@dataclass(frozen=True)
class SplitSpec:
    """Character-level train/test partition; disjoint and covering."""

    train_characters: frozenset[str]
    test_characters: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "train_characters", frozenset(self.train_characters))
        object.__setattr__(self, "test_characters", frozenset(self.test_characters))
        overlap = self.train_characters & self.test_characters
        if overlap:
            raise DatasetError(f"character overlap: {sorted(overlap)} appear in both split sides")


@dataclass(frozen=True)
class Triplet:
    """One (reference image, pose image, target image) unit, as paths."""

    character_id: str
    action_name: str
    frame_index: int
    reference_path: str
    pose_path: str
    target_path: str


def build_manifest(root: str | Path) -> Manifest:
    """Walk the dataset tree and inventory it.

    Fails loudly on structural violations: characters without a reference
    image, frames without a matching pose file, or gaps in frame numbering.
    """
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"no characters found: {root} is not a directory")
    characters = []
    for char_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        cid = char_dir.name
        ref = char_dir / "reference.png"
        if not ref.is_file():
            raise DatasetError(f"character {cid}: missing reference.png")
        sequences = []
        for action_dir in sorted(p for p in char_dir.iterdir() if p.is_dir()):
            action = action_dir.name
            seq_name = f"{cid}/{action}"
            indices = []
            for f in action_dir.iterdir():
                m = _FRAME_RE.match(f.name)
                if m:
                    indices.append(int(m.group(1)))
            if not indices:
                raise DatasetError(f"sequence {seq_name}: contains no frame_<k>.png files")
            indices.sort()
            if indices != list(range(len(indices))):
                raise DatasetError(
                    f"sequence {seq_name}: frame indices {indices} are not contiguous from 0"
                )
            pose_count = sum(
                1 for f in action_dir.iterdir() if re.match(r"^pose_(\d+)\.json$", f.name)
            )
            if pose_count != len(indices):
                raise DatasetError(
                    f"sequence {seq_name}: {len(indices)} frames but {pose_count} pose files"
                )
            frame_paths, pose_paths = [], []
            for k in indices:
                pose = action_dir / f"pose_{k}.json"
                if not pose.is_file():
                    raise DatasetError(f"sequence {seq_name}: missing pose file for frame {k}")
                frame_paths.append(str((action_dir / f"frame_{k}.png").relative_to(root)))
                pose_paths.append(str(pose.relative_to(root)))
            sequences.append(
                Sequence(action_name=action, frame_paths=tuple(frame_paths), pose_paths=tuple(pose_paths))
            )
        if sequences:
            characters.append(
                Character(
                    character_id=cid,
                    reference_frame_path=str(ref.relative_to(root)),
                    sequences=tuple(sequences),
                )
            )
    if not characters:
        raise DatasetError(f"no characters found under {root}")
    return Manifest(characters=tuple(characters), root=str(root))


def manifest_to_doc(m: Manifest) -> dict:
    return {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "characters": [
            {
                "character_id": c.character_id,
                "reference_frame_path": c.reference_frame_path,
                "sequences": [
                    {
                        "action_name": s.action_name,
                        "frame_paths": list(s.frame_paths),
                        "pose_paths": list(s.pose_paths),
                    }
                    for s in c.sequences
                ],
            }
            for c in m.characters
        ],
        "counts": m.counts,
    }


def save_manifest(m: Manifest, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(manifest_to_doc(m), indent=1, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_manifest(path: str | Path, root: str | Path | None = None) -> Manifest:
    path = Path(path)
    doc = json.loads(path.read_text(encoding="utf-8"))
    if doc.get("schema_version") != MANIFEST_SCHEMA_VERSION:
        raise DatasetError(
            f"{path}: manifest schema_version {doc.get('schema_version')} != {MANIFEST_SCHEMA_VERSION}"
        )
    characters = tuple(
        Character(
            character_id=c["character_id"],
            reference_frame_path=c["reference_frame_path"],
            sequences=tuple(
                Sequence(
                    action_name=s["action_name"],
                    frame_paths=tuple(s["frame_paths"]),
                    pose_paths=tuple(s["pose_paths"]),
                )
                for s in c["sequences"]
            ),
        )
        for c in doc["characters"]
    )
    m = Manifest(characters=characters, root=str(root) if root is not None else str(path.parent))
    if doc["counts"] != m.counts:
        raise DatasetError(
            f"{path}: stored counts {doc['counts']} disagree with recomputed {m.counts}"
        )
    seen = set()
    for c in m.characters:
        for s in c.sequences:
            key = (c.character_id, s.action_name)
            if key in seen:
                raise DatasetError(f"{path}: duplicate sequence {key}")
            seen.add(key)
            if len(s.frame_paths) != len(s.pose_paths):
                raise DatasetError(
                    f"{path}: sequence {key} has {len(s.frame_paths)} frames, {len(s.pose_paths)} poses"
                )
    return m


def split_by_character(m: Manifest, spec: SplitSpec) -> tuple[list[Triplet], list[Triplet]]:
    """Partition all triplets by the character-level split.

    Guarantees zero character overlap between the sides and that the two
    lists together cover every triplet exactly once.
    """
    all_ids = m.character_ids
    both = spec.train_characters & spec.test_characters
    if both:
        raise DatasetError(f"character overlap: {sorted(both)}")
    missing = all_ids - (spec.train_characters | spec.test_characters)
    if missing:
        raise DatasetError(f"characters in neither split side: {sorted(missing)}")
    unknown = (spec.train_characters | spec.test_characters) - all_ids
    if unknown:
        raise DatasetError(f"split names unknown characters: {sorted(unknown)}")

    train, test = [], []
    for c in m.characters:
        bucket = train if c.character_id in spec.train_characters else test
        for s in c.sequences:
            for k in range(len(s)):
                bucket.append(
                    Triplet(
                        character_id=c.character_id,
                        action_name=s.action_name,
                        frame_index=k,
                        reference_path=c.reference_frame_path,
                        pose_path=s.pose_paths[k],
                        target_path=s.frame_paths[k],
                    )
                )
    return train, test


def save_split(spec: SplitSpec, path: str | Path) -> None:
    doc = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "train_characters": sorted(spec.train_characters),
        "test_characters": sorted(spec.test_characters),
    }
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def load_split(path: str | Path) -> SplitSpec:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return SplitSpec(
        train_characters=frozenset(doc["train_characters"]),
        test_characters=frozenset(doc["test_characters"]),
    )
