"""Learned image transmission over a three-node relay channel.

One source transmission serves two tasks at the destination: image
reconstruction and classification.  The relay decodes, classifies and
re-encodes with class conditioning; the destination fuses the direct and
relay links with mutual attention.
"""

from .channel import (ChannelSymbols, LinkConfig, ReceivedSignal, apply_link,
                      complex_to_real, front_end, mmse_equalize,
                      power_normalize, real_to_complex, snr_to_noise_var)
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .class_codec import ClassAidedDecoder, ClassAidedEncoder, LabelGate
from .classifiers import ImageClassifier, SignalClassifier
from .codec import CodecSpec, Decoder, Encoder
from .config import (CodecDims, ConfigError, ExperimentConfig, derive_dims,
                     full_scale_config, load_config, save_resolved_config)
from .data import LabeledImageSet, load_dataset
from .fusion import MutualAttention
from .metrics import accuracy, psnr
from .pipeline import (ForwardOutputs, LinkSet, MultiTaskRelaySystem,
                       RelayOnlyBaseline, build_system, classification_loss,
                       joint_loss, links_from_config, reconstruction_loss)
from .sweep import ResultsTable, SweepRow, emit_plots, run_sweep
from .training import (EpochStats, StageOrderError, Trainer, TrainingDiverged,
                       evaluate_system)

__version__ = "0.1.0"

__all__ = [
    "ChannelSymbols", "LinkConfig", "ReceivedSignal", "apply_link",
    "complex_to_real", "front_end", "mmse_equalize", "power_normalize",
    "real_to_complex", "snr_to_noise_var",
    "CheckpointError", "load_checkpoint", "save_checkpoint",
    "ClassAidedDecoder", "ClassAidedEncoder", "LabelGate",
    "ImageClassifier", "SignalClassifier",
    "CodecSpec", "Decoder", "Encoder",
    "CodecDims", "ConfigError", "ExperimentConfig", "derive_dims",
    "full_scale_config", "load_config", "save_resolved_config",
    "LabeledImageSet", "load_dataset",
    "MutualAttention",
    "accuracy", "psnr",
    "ForwardOutputs", "LinkSet", "MultiTaskRelaySystem", "RelayOnlyBaseline",
    "build_system", "classification_loss", "joint_loss", "links_from_config",
    "reconstruction_loss",
    "ResultsTable", "SweepRow", "emit_plots", "run_sweep",
    "EpochStats", "StageOrderError", "Trainer", "TrainingDiverged",
    "evaluate_system",
    "__version__",
]
