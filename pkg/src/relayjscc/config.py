"""Experiment configuration: loading, validation and dimension derivation.

A run is fully described by an ``ExperimentConfig``.  Configs are flat YAML
key/value files; every unspecified key falls back to a documented default so
a config file only needs to name what it changes.  Trained runs write their
resolved config next to their outputs for provenance.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import yaml

log = logging.getLogger(__name__)

DATASETS = ("stl10", "cifar10", "toy_subset")
FADINGS = ("awgn", "rayleigh")
DECODER_INPUTS = ("rd", "fused")


class ConfigError(ValueError):
    """Raised when a config file is missing, unparseable, or invalid."""


@dataclass
class ExperimentConfig:
    """One experiment point: dataset, channel condition, model and schedule.

    ``d_rd`` and ``d_sd`` are derived (``d_rd = 1 - d_sr``, ``d_sd = 1``);
    they are properties, not stored fields, so they can never go stale.
    """

    dataset_name: str = "toy_subset"
    image_size: int = 32
    num_classes: int = 2
    cbr: float = 1.0 / 12.0
    snr_db: float = 15.0
    fading: str = "awgn"
    d_sr: float = 0.5
    path_loss_exp: float = 2.0
    lambda_cls: float = 0.1
    stage_blocks: list[int] = field(default_factory=lambda: [2, 4])
    stage_widths: list[int] = field(default_factory=lambda: [32, 64])
    window_size: int | None = None  # auto from image size when None
    seed: int = 0
    epochs_per_stage: list[int] = field(default_factory=lambda: [20, 20, 20])
    learning_rate: float = 1e-4
    batch_size: int = 16
    # dataset plumbing
    data_dir: str = "data"
    toy_per_class: int = 100
    toy_eval_per_class: int = 50
    # destination decoder input: "rd" (RD-link signal, default) or "fused"
    # (output of the mutual attention module) -- kept switchable because the
    # two readings differ in what the reconstruction decoder consumes.
    dest_decoder_input: str = "rd"
    device: str = "cpu"

    @property
    def d_rd(self) -> float:
        return 1.0 - self.d_sr

    @property
    def d_sd(self) -> float:
        return 1.0

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if self.dataset_name not in DATASETS:
            raise ConfigError(
                f"dataset_name: {self.dataset_name!r} not one of {DATASETS}")
        if self.fading not in FADINGS:
            raise ConfigError(f"fading: {self.fading!r} not one of {FADINGS}")
        if self.dest_decoder_input not in DECODER_INPUTS:
            raise ConfigError(
                f"dest_decoder_input: {self.dest_decoder_input!r} "
                f"not one of {DECODER_INPUTS}")
        if not (0.0 < self.d_sr < 1.0):
            raise ConfigError(f"d_sr: must lie in (0, 1), got {self.d_sr}")
        if self.cbr <= 0:
            raise ConfigError(f"cbr: must be > 0, got {self.cbr}")
        if self.image_size <= 0 or self.image_size % 4 != 0:
            raise ConfigError(
                f"image_size: must be a positive multiple of 4 "
                f"(two 2x spatial reductions), got {self.image_size}")
        if self.lambda_cls < 0:
            raise ConfigError(
                f"lambda_cls: must be >= 0, got {self.lambda_cls}")
        if self.path_loss_exp < 0:
            raise ConfigError(
                f"path_loss_exp: must be >= 0, got {self.path_loss_exp}")
        if self.num_classes < 2:
            raise ConfigError(
                f"num_classes: must be >= 2, got {self.num_classes}")
        if len(self.stage_blocks) != 2 or min(self.stage_blocks) < 1:
            raise ConfigError(
                f"stage_blocks: need two counts >= 1, got {self.stage_blocks}")
        if len(self.stage_widths) != 2:
            raise ConfigError(
                f"stage_widths: need two widths, got {self.stage_widths}")
        if self.stage_widths[1] != 2 * self.stage_widths[0]:
            raise ConfigError(
                f"stage_widths: second width must double the first "
                f"(patch merging), got {self.stage_widths}")
        if len(self.epochs_per_stage) != 3 or min(self.epochs_per_stage) < 0:
            raise ConfigError(
                f"epochs_per_stage: need three non-negative counts, "
                f"got {self.epochs_per_stage}")
        if self.learning_rate <= 0:
            raise ConfigError(
                f"learning_rate: must be > 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size: must be >= 1, got {self.batch_size}")
        ws = self.resolved_window_size()
        for grid in (self.image_size // 2, self.image_size // 4):
            if grid % ws != 0:
                raise ConfigError(
                    f"window_size: {ws} does not divide the {grid}x{grid} "
                    f"token grid at image_size={self.image_size}")

    def resolved_window_size(self) -> int:
        """Window size actually used: 8 at 96px, 4 at 32px, capped by grid."""
        if self.window_size is not None:
            return self.window_size
        return max(1, min(8, self.image_size // 8))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["d_rd"] = self.d_rd
        d["d_sd"] = self.d_sd
        d["window_size"] = self.resolved_window_size()
        return d

    def with_updates(self, **kwargs) -> "ExperimentConfig":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class CodecDims:
    """Channel-signal dimensions implied by (image_size, cbr).

    ``n_patches * complex_per_patch`` matches the CBR-implied complex budget
    up to a per-patch rounding residual, which is recorded and logged.
    """

    n_patches: int
    patch_len_real: int
    complex_per_patch: int
    grid_side: int
    residual: int  # budget - n_patches * complex_per_patch

    @property
    def total_complex(self) -> int:
        return self.n_patches * self.complex_per_patch


def _parse_ratio(value) -> float:
    """Accept plain floats or 'a/b' strings (cbr is naturally a fraction)."""
    if isinstance(value, str) and "/" in value:
        num, den = value.split("/", 1)
        return float(num) / float(den)
    return float(value)


def load_config(path: str | Path) -> ExperimentConfig:
    """Load a flat YAML config; unknown keys are rejected by name.

    Raises ConfigError for a missing file, a parse failure, or any field
    invariant violation.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file does not exist: {path}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path} is not valid YAML: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must be a flat key/value map")

    # resolved configs echo the derived distances; accept them back as long
    # as they are consistent with d_sr
    d_sr = raw.get("d_sr", ExperimentConfig.d_sr)
    for key, expected in (("d_rd", 1.0 - d_sr), ("d_sd", 1.0)):
        if key in raw:
            if abs(float(raw.pop(key)) - expected) > 1e-9:
                raise ConfigError(
                    f"{key}: derived field disagrees with d_sr={d_sr}")

    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "cbr" in raw:
        raw["cbr"] = _parse_ratio(raw["cbr"])
    try:
        return ExperimentConfig(**raw)
    except TypeError as exc:
        raise ConfigError(f"bad config value: {exc}") from exc


def save_resolved_config(cfg: ExperimentConfig, path: str | Path) -> None:
    """Write the fully-resolved config (defaults and derived values filled)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=True))


def derive_dims(cfg: ExperimentConfig) -> CodecDims:
    """Derive channel-signal dimensions from image size and bandwidth ratio.

    The complex-symbol budget is ``round(cbr * 3 * H * W)``; the token count
    is fixed by the two 2x reductions to ``(H/4) * (W/4)``.  Per-patch symbol
    counts are rounded to the nearest integer and the leftover budget is
    reported as ``residual``.
    """
    h = w = cfg.image_size
    budget = round(cfg.cbr * 3 * h * w)
    grid_side = h // 4
    n_patches = grid_side * (w // 4)
    complex_per_patch = round(budget / n_patches)
    if complex_per_patch < 1:
        raise ConfigError(
            f"cbr: {cfg.cbr} yields fewer than one complex symbol per patch "
            f"({budget} symbols over {n_patches} patches)")
    residual = budget - n_patches * complex_per_patch
    if residual != 0:
        log.info("dims: budget %d != %d patches x %d symbols (residual %d)",
                 budget, n_patches, complex_per_patch, residual)
    return CodecDims(
        n_patches=n_patches,
        patch_len_real=2 * complex_per_patch,
        complex_per_patch=complex_per_patch,
        grid_side=grid_side,
        residual=residual,
    )


def snr_points(spec: str) -> list[float]:
    """Parse a comma-separated sweep point list, e.g. '-5,0,5,10,15'."""
    points = [float(p) for p in spec.split(",") if p.strip()]
    if not points:
        raise ConfigError(f"empty sweep point list: {spec!r}")
    return points


def attention_heads(width: int) -> int:
    """Heads per attention layer: one head per 32 channels, at least one."""
    return max(1, width // 32)


def full_scale_config() -> ExperimentConfig:
    """The 96x96 / 10-class configuration used for full-budget reproduction."""
    return ExperimentConfig(
        dataset_name="stl10",
        image_size=96,
        num_classes=10,
        stage_blocks=[2, 4],
        stage_widths=[128, 256],
        epochs_per_stage=[400, 400, 400],
        batch_size=32,
    )
