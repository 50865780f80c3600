"""ferlite: a small, dependency-light facial-expression pipeline.

A from-scratch CNN (hand-written forward and backward passes over a
compiled or numpy kernel backend), FER2013-format data handling with
on-the-fly augmentation, two-stage fine-tuning, and scene-change gated
inference over simulated grayscale frame streams.
"""

__version__ = "0.1.0"

from ferlite.augment import AugmentConfig, adjust_brightness, augment, flip_horizontal, rotate
from ferlite.checkpoint import load_checkpoint, save_checkpoint
from ferlite.dataset import (LabeledImage, SplitDataset, load_fer_csv,
                             save_fer_csv, split, split_by_usage)
from ferlite.errors import (ArchitectureMismatchError, CheckpointError,
                            CheckpointFormatError, CheckpointTruncatedError,
                            ConfigError, CsvParseError, DataError, FerliteError,
                            InputError, PgmError, ShapeError, TrainingError)
from ferlite.gate import (GateState, StreamRecord, classify_scene, default_threshold,
                          gated_predict, run_stream, sad, write_stream_report)
from ferlite.imgproc import Frame, gaussian3x3, normalize, prepare_frame, resize_bilinear
from ferlite.labels import EMOTIONS, NUM_CLASSES, label_index, label_name
from ferlite.metrics import ConfusionMatrix, confusion_matrix
from ferlite.model import FerModel, ModelConfig, build_fer_cnn, parameter_count
from ferlite.pgm import list_frames, read_pgm, write_pgm
from ferlite.train import (EpochStats, TrainConfig, evaluate, fine_tune_stage2,
                           train, write_history_csv)

__all__ = [name for name in dir() if not name.startswith("_")]
