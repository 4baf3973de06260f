from ..nets.archive import load_archive as load_checkpoint
from ..nets.archive import save_archive as save_checkpoint
from .generate import StageError, generate
from .loss import STAGE_TRAINABLE, compute_loss, training_loss
from .tensors import SequenceTensors, TripletBatch, load_sequence_tensors, load_triplet_batch
from .train import (
    LossLog,
    TrainingDiverged,
    clip_start_range,
    sample_clip,
    train_autoencoder,
    train_stage1,
    train_stage2,
)

__all__ = [
    "load_checkpoint", "save_checkpoint",
    "StageError", "generate",
    "STAGE_TRAINABLE", "compute_loss", "training_loss",
    "SequenceTensors", "TripletBatch", "load_sequence_tensors", "load_triplet_batch",
    "LossLog", "TrainingDiverged", "clip_start_range", "sample_clip",
    "train_autoencoder", "train_stage1", "train_stage2",
]
