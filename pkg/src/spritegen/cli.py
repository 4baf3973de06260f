"""Command-line entry point.

Subcommands: ``dataset build|verify``, ``train``, ``generate``,
``evaluate``.  Failure paths exit nonzero with one machine-parsable line
``error: <kind>: <message>`` on stderr.

Exit codes:
    0  success
    1  usage error
    2  invariant violation (dataset/split/config)
    3  empty input
    4  training aborted (non-finite loss)
    5  checkpoint at the wrong training stage
    6  evaluation key mismatch
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

EXIT_USAGE = 1
EXIT_INVARIANT = 2
EXIT_EMPTY = 3
EXIT_TRAINING_ABORT = 4
EXIT_BAD_STAGE = 5
EXIT_EVAL_MISMATCH = 6


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code = code
        self.kind = kind


def _fail(code: int, kind: str, message: str) -> "CliError":
    return CliError(code, kind, message)


class _Parser(argparse.ArgumentParser):
    """argparse maps its own failures onto the documented usage exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: usage: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spritegen", description="Pose-guided sprite sequence generation")
    sub = parser.add_subparsers(dest="command", required=True)

    p_data = sub.add_parser("dataset", parents=[], help="build or verify a dataset manifest")
    data_sub = p_data.add_subparsers(dest="subcommand", required=True)
    for name in ("build", "verify"):
        p = data_sub.add_parser(name)
        p.add_argument("--root", required=True, help="dataset root directory")
        p.add_argument("--out", required=True, help="output directory for manifest + split")
        if name == "build":
            p.add_argument("--train-characters", help="comma-separated ids (default: seeded split)")
            p.add_argument("--test-characters", help="comma-separated ids")
            p.add_argument("--train-fraction", type=float, default=0.7)
            p.add_argument("--seed", type=int, default=None, help="split shuffle seed (default 42)")

    p_train = sub.add_parser("train", help="run one training stage")
    p_train.add_argument("--stage", type=int, required=True, choices=(1, 2))
    p_train.add_argument("--config", required=True)
    p_train.add_argument("--root", required=True, help="dataset root directory")
    p_train.add_argument("--manifest", help="manifest JSON (default <root>/manifest.json)")
    p_train.add_argument("--split", help="split JSON (default <root>/split.json)")
    p_train.add_argument("--out", required=True, help="output directory (checkpoints, loss log)")
    p_train.add_argument("--stage1", help="stage-1 checkpoint directory (required for --stage 2)")
    p_train.add_argument("--resume", help="checkpoint directory to continue from")
    p_train.add_argument("--steps", type=int, help="override the configured step count")
    p_train.add_argument("--seed", type=int, help="override the configured seed")

    p_gen = sub.add_parser("generate", help="generate frames for a pose sequence")
    p_gen.add_argument("--checkpoint", required=True)
    p_gen.add_argument("--reference", required=True, help="reference PNG (RGBA)")
    p_gen.add_argument("--poses", nargs="+", required=True, help="pose JSON files, in order")
    p_gen.add_argument("--out", required=True, help="output directory")
    p_gen.add_argument("--seed", type=int, help="sampling seed (default: config seed)")

    p_eval = sub.add_parser("evaluate", help="score generated frames against ground truth")
    p_eval.add_argument("--generated", required=True)
    p_eval.add_argument("--truth", required=True)
    p_eval.add_argument("--out", required=True, help="report JSON path (table written alongside)")
    p_eval.add_argument("--extractor", default="identity", choices=("identity", "pyramid"))

    return parser


# -- dataset ------------------------------------------------------------


def _default_split(manifest, fraction: float, seed: int):
    import torch

    from .core.seeding import SeedHub
    from .data.manifest import SplitSpec

    ids = sorted(manifest.character_ids)
    perm = torch.randperm(len(ids), generator=SeedHub(seed).generator("split")).tolist()
    n_train = max(1, min(len(ids) - 1, round(fraction * len(ids)))) if len(ids) > 1 else 1
    train = {ids[i] for i in perm[:n_train]}
    return SplitSpec(train_characters=frozenset(train), test_characters=frozenset(ids) - train)


def cmd_dataset(args) -> int:
    from .data.manifest import (
        DatasetError,
        SplitSpec,
        build_manifest,
        load_manifest,
        load_split,
        save_manifest,
        save_split,
        split_by_character,
    )

    out = Path(args.out)
    if args.subcommand == "build":
        try:
            manifest = build_manifest(args.root)
        except DatasetError as exc:
            if "no characters found" in str(exc):
                raise _fail(EXIT_EMPTY, "empty-dataset", str(exc))
            raise _fail(EXIT_INVARIANT, "dataset-invariant", str(exc))
        if args.train_characters or args.test_characters:
            if not (args.train_characters and args.test_characters):
                raise _fail(EXIT_USAGE, "usage",
                            "--train-characters and --test-characters must be given together")
            spec = SplitSpec(
                train_characters=frozenset(filter(None, args.train_characters.split(","))),
                test_characters=frozenset(filter(None, args.test_characters.split(","))),
            )
        else:
            seed = args.seed if args.seed is not None else 42
            spec = _default_split(manifest, args.train_fraction, seed)
        try:
            train, test = split_by_character(manifest, spec)
        except DatasetError as exc:
            raise _fail(EXIT_INVARIANT, "split-invariant", str(exc))
        out.mkdir(parents=True, exist_ok=True)
        save_manifest(manifest, out / "manifest.json")
        save_split(spec, out / "split.json")
        counts = manifest.counts
        print(
            f"manifest: {counts['characters']} characters, {counts['sequences']} sequences, "
            f"{counts['triplets']} triplets ({len(train)} train / {len(test)} test)"
        )
        return 0

    # verify
    try:
        manifest = load_manifest(out / "manifest.json", root=args.root)
        rebuilt = build_manifest(args.root)
        if manifest.counts != rebuilt.counts:
            raise DatasetError(
                f"counts: manifest says {manifest.counts}, tree has {rebuilt.counts}"
            )
        spec = load_split(out / "split.json")
        train, test = split_by_character(manifest, spec)
    except FileNotFoundError as exc:
        raise _fail(EXIT_USAGE, "usage", f"missing file: {exc}")
    except DatasetError as exc:
        raise _fail(EXIT_INVARIANT, "dataset-invariant", str(exc))
    print(f"ok: {len(train)} train / {len(test)} test triplets, split disjoint and covering")
    return 0


# -- train --------------------------------------------------------------


def cmd_train(args) -> int:
    from .core.config import ConfigError, load_config
    from .core.seeding import apply_thread_limit
    from .data.manifest import DatasetError, load_manifest, load_split, split_by_character
    from .nets.archive import ArchiveError, load_archive
    from .pipeline.tensors import load_sequence_tensors, load_triplet_batch
    from .pipeline.train import TrainingDiverged, train_stage1, train_stage2

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        raise _fail(EXIT_INVARIANT, "config", str(exc))
    apply_thread_limit(cfg.num_threads)
    seed = args.seed if args.seed is not None else cfg.seed
    root = Path(args.root)
    manifest_path = Path(args.manifest) if args.manifest else root / "manifest.json"
    split_path = Path(args.split) if args.split else root / "split.json"
    try:
        manifest = load_manifest(manifest_path, root=root)
        split = load_split(split_path)
        train_triplets, _ = split_by_character(manifest, split)
    except FileNotFoundError as exc:
        raise _fail(EXIT_USAGE, "usage", f"missing file: {exc}")
    except DatasetError as exc:
        raise _fail(EXIT_INVARIANT, "dataset-invariant", str(exc))
    if not train_triplets:
        raise _fail(EXIT_EMPTY, "empty-dataset", "no training triplets in the split")

    resume = None
    if args.resume:
        try:
            resume = load_archive(args.resume)
        except ArchiveError as exc:
            raise _fail(EXIT_BAD_STAGE, "checkpoint", str(exc))

    try:
        if args.stage == 1:
            data = load_triplet_batch(root, train_triplets, cfg)
            train_stage1(data, cfg, seed, out_dir=args.out, steps=args.steps, resume=resume)
        else:
            if not args.stage1 and not args.resume:
                raise _fail(EXIT_USAGE, "usage", "--stage 2 requires --stage1 <checkpoint>")
            stage1 = resume if args.stage1 is None else None
            if args.stage1:
                try:
                    stage1 = load_archive(args.stage1)
                except ArchiveError as exc:
                    raise _fail(EXIT_BAD_STAGE, "checkpoint", str(exc))
            if stage1 is not None and stage1.stage != 1 and resume is None:
                raise _fail(
                    EXIT_BAD_STAGE, "checkpoint",
                    f"--stage1 archive has stage {stage1.stage}, expected 1",
                )
            sequences = load_sequence_tensors(root, manifest, cfg, split.train_characters)
            if resume is not None and stage1 is None:
                # resuming stage 2 without re-supplying stage 1: freeze check
                # happens against the resumed weights themselves
                stage1 = resume.with_metadata(stage=1)
            train_stage2(sequences, stage1, cfg, seed, out_dir=args.out,
                         steps=args.steps, resume=resume)
    except TrainingDiverged as exc:
        raise _fail(EXIT_TRAINING_ABORT, "training-abort", str(exc))
    except ValueError as exc:
        raise _fail(EXIT_INVARIANT, "training", str(exc))
    print(f"stage {args.stage} training complete; checkpoints under {args.out}")
    return 0


# -- generate -----------------------------------------------------------


def cmd_generate(args) -> int:
    from .core.imageio import load_rgba, save_image
    from .core.seeding import apply_thread_limit
    from .core.types import ReferenceImage
    from .data.pose_io import load_pose
    from .nets.archive import ArchiveError, load_archive
    from .pipeline.generate import StageError, generate

    try:
        archive = load_archive(args.checkpoint)
    except ArchiveError as exc:
        raise _fail(EXIT_BAD_STAGE, "checkpoint", str(exc))
    apply_thread_limit(archive.config.num_threads)
    seed = args.seed if args.seed is not None else archive.config.seed

    reference = ReferenceImage(pixels=load_rgba(args.reference).astype(np.float64),
                               character_id=Path(args.reference).stem)
    try:
        poses = [load_pose(p) for p in args.poses]
    except (ValueError, FileNotFoundError) as exc:
        raise _fail(EXIT_INVARIANT, "pose", str(exc))

    try:
        frames = generate(reference, poses, archive, seed)
    except StageError as exc:
        raise _fail(EXIT_BAD_STAGE, "checkpoint", str(exc))
    except ValueError as exc:
        raise _fail(EXIT_INVARIANT, "generate", str(exc))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for frame in frames:
        save_image(frame.pixels, out / f"frame_{frame.index}.png")
    sheet = np.concatenate([f.pixels for f in frames], axis=1)
    save_image(sheet, out / "sheet.png")
    print(f"wrote {len(frames)} frames + sheet.png to {out}")
    return 0


# -- evaluate -----------------------------------------------------------


def _collect_frames(root: Path) -> dict[str, list]:
    from .core.imageio import load_rgba
    from .data.composite import composite_background

    sequences: dict[str, list] = {}
    for path in sorted(root.rglob("frame_*.png")):
        key = str(path.parent.relative_to(root))
        sequences.setdefault(key, []).append(path)
    return {
        key: [composite_background(load_rgba(p).astype(np.float64)) for p in sorted(paths)]
        for key, paths in sequences.items()
    }


def cmd_evaluate(args) -> int:
    from .metrics.perceptual import make_extractor
    from .metrics.report import KeyMismatchError, evaluate_run, save_report

    generated_root, truth_root = Path(args.generated), Path(args.truth)
    if not generated_root.is_dir() or not truth_root.is_dir():
        raise _fail(EXIT_USAGE, "usage", "both --generated and --truth must be directories")
    generated = _collect_frames(generated_root)
    truth = _collect_frames(truth_root)
    if not generated:
        raise _fail(EXIT_EMPTY, "empty-input", f"no frame_*.png under {generated_root}")
    try:
        report = evaluate_run(generated, truth, make_extractor(args.extractor),
                              metadata={"generated": str(generated_root), "truth": str(truth_root)})
    except KeyMismatchError as exc:
        raise _fail(EXIT_EVAL_MISMATCH, "eval-mismatch", str(exc))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_report(report, out, out.with_suffix(".txt"))
    from .metrics.report import format_table

    print(format_table(report), end="")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "dataset": cmd_dataset,
        "train": cmd_train,
        "generate": cmd_generate,
        "evaluate": cmd_evaluate,
    }
    try:
        return handlers[args.command](args)
    except CliError as exc:
        print(f"error: {exc.kind}: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
