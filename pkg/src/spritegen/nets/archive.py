"""Parameter archives: grouped tensors plus stage provenance.

On disk an archive is a directory with one binary blob per parameter and
a JSON metadata manifest (``archive.json``).  Blob layout, all
little-endian:

    uint32      ndim
    uint32[n]   dims
    float32[]   row-major tensor data

The manifest records schema version, training stage, seed, step, the
full run configuration (and its hash), and the tensor index.  Loading
verifies every blob against its manifest entry; a truncated or reshaped
blob raises :class:`ArchiveError`.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import torch

from ..core.config import RunConfig

__all__ = ["ARCHIVE_SCHEMA_VERSION", "GROUPS", "ArchiveError", "ParameterArchive",
           "save_archive", "load_archive"]

ARCHIVE_SCHEMA_VERSION = 1

GROUPS = ("denoiser", "referencenet", "pose_guider", "motion", "embedder", "codec")

# groups whose weights stage 2 must carry over bit-identically from stage 1
FROZEN_IN_STAGE2 = ("denoiser", "referencenet", "pose_guider", "embedder", "codec")


class ArchiveError(RuntimeError):
    """Corrupt blob, missing tensor, or schema mismatch."""


@dataclass(frozen=True)
class ParameterArchive:
    """All trainable parameters, grouped by component.

    stage 0: freshly initialized; 1: pose-to-image trained; 2: motion
    module trained on top of frozen stage-1 weights.
    """

    groups: dict[str, dict[str, torch.Tensor]]
    stage: int
    config: RunConfig
    seed: int
    step: int = 0

    def __post_init__(self):
        if self.stage not in (0, 1, 2):
            raise ArchiveError(f"stage must be 0, 1 or 2, got {self.stage}")
        unknown = set(self.groups) - set(GROUPS)
        if unknown:
            raise ArchiveError(f"unknown parameter groups: {sorted(unknown)}")

    def with_metadata(self, **kwargs) -> "ParameterArchive":
        return replace(self, **kwargs)

    def group_bytes(self, group: str) -> bytes:
        """Canonical byte serialization of one group (for equality checks)."""
        chunks = []
        for name in sorted(self.groups.get(group, {})):
            tensor = self.groups[group][name]
            chunks.append(name.encode())
            chunks.append(tensor.detach().cpu().to(torch.float32).numpy().tobytes())
        return b"".join(chunks)

    def n_parameters(self) -> int:
        return sum(t.numel() for g in self.groups.values() for t in g.values())


def _blob_path(directory: Path, group: str, name: str) -> Path:
    return directory / f"{group}--{name}.bin"


def _write_blob(path: Path, tensor: torch.Tensor) -> None:
    arr = tensor.detach().cpu().to(torch.float32).numpy()
    with open(path, "wb") as fh:
        fh.write(struct.pack("<I", arr.ndim))
        fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        fh.write(arr.astype("<f4", copy=False).tobytes(order="C"))


def _read_blob(path: Path, expected_shape: tuple[int, ...]) -> torch.Tensor:
    raw = path.read_bytes()
    if len(raw) < 4:
        raise ArchiveError(f"{path.name}: truncated blob (no header)")
    (ndim,) = struct.unpack_from("<I", raw, 0)
    header_end = 4 + 4 * ndim
    if len(raw) < header_end:
        raise ArchiveError(f"{path.name}: truncated shape header")
    shape = struct.unpack_from(f"<{ndim}I", raw, 4) if ndim else ()
    if tuple(shape) != tuple(expected_shape):
        raise ArchiveError(
            f"{path.name}: shape header {shape} disagrees with manifest {tuple(expected_shape)}"
        )
    count = int(np.prod(shape, dtype=np.int64)) if ndim else 1
    expected_bytes = header_end + 4 * count
    if len(raw) != expected_bytes:
        raise ArchiveError(
            f"{path.name}: corrupt blob, {len(raw)} bytes but shape {shape} needs {expected_bytes}"
        )
    arr = np.frombuffer(raw, dtype="<f4", offset=header_end, count=count).reshape(shape)
    return torch.from_numpy(arr.copy())


def save_archive(archive: ParameterArchive, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    index = []
    for group in GROUPS:
        for name in sorted(archive.groups.get(group, {})):
            tensor = archive.groups[group][name]
            _write_blob(_blob_path(directory, group, name), tensor)
            index.append({
                "group": group,
                "name": name,
                "shape": list(tensor.shape),
                "file": _blob_path(directory, group, name).name,
            })
    meta = {
        "schema_version": ARCHIVE_SCHEMA_VERSION,
        "stage": archive.stage,
        "seed": archive.seed,
        "step": archive.step,
        "config": archive.config.to_nested(),
        "config_hash": archive.config.config_hash(),
        "tensors": index,
    }
    (directory / "archive.json").write_text(
        json.dumps(meta, indent=1, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_archive(directory: str | Path) -> ParameterArchive:
    directory = Path(directory)
    meta_path = directory / "archive.json"
    if not meta_path.is_file():
        raise ArchiveError(f"{directory}: no archive.json manifest")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    if meta.get("schema_version") != ARCHIVE_SCHEMA_VERSION:
        raise ArchiveError(
            f"{directory}: archive schema_version {meta.get('schema_version')} "
            f"!= {ARCHIVE_SCHEMA_VERSION}"
        )
    config = RunConfig.from_nested(meta["config"])
    if config.config_hash() != meta["config_hash"]:
        raise ArchiveError(f"{directory}: config hash mismatch")
    groups: dict[str, dict[str, torch.Tensor]] = {g: {} for g in GROUPS}
    for entry in meta["tensors"]:
        tensor = _read_blob(directory / entry["file"], tuple(entry["shape"]))
        groups[entry["group"]][entry["name"]] = tensor
    return ParameterArchive(
        groups=groups,
        stage=int(meta["stage"]),
        config=config,
        seed=int(meta["seed"]),
        step=int(meta["step"]),
    )
