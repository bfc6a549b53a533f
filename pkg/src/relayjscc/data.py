"""Dataset ingestion: STL10/CIFAR10 via torchvision plus a synthetic desk set.

The toy subset is generated, not downloaded: each class owns a smooth random
texture (a small bank of seeded 2-D cosines) plus a class base level and
color tint, and every image is a jittered, shifted, lightly-noised draw from
its class.  Classes differ in cheap global statistics as well as in texture,
which keeps desk-scale classification learnable at the training budget while
reconstruction stays nontrivial.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from torch import Tensor

from .config import ExperimentConfig


@dataclass
class LabeledImageSet:
    """Images (N, 3, H, W) float32 in [0,1] with integer labels."""

    images: Tensor
    labels: Tensor
    split: str  # "train" | "eval"

    def __post_init__(self) -> None:
        if self.images.ndim != 4 or self.images.shape[1] != 3:
            raise ValueError(f"expected (N, 3, H, W) images, got {tuple(self.images.shape)}")
        if len(self.labels) != len(self.images):
            raise ValueError("label count does not match image count")

    def __len__(self) -> int:
        return self.images.shape[0]

    @property
    def per_class_counts(self) -> dict[int, int]:
        return dict(sorted(Counter(self.labels.tolist()).items()))

    def batches(self, batch_size: int, rng: np.random.Generator | None = None):
        """Yield (images, labels) batches, shuffled when an rng is given."""
        order = np.arange(len(self))
        if rng is not None:
            rng.shuffle(order)
        for start in range(0, len(order), batch_size):
            idx = order[start:start + batch_size]
            yield self.images[idx], self.labels[idx]


def _class_texture(rng: np.random.Generator, size: int) -> np.ndarray:
    """Smooth class-specific texture: a few low-frequency 2-D cosines."""
    yy, xx = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    tex = np.zeros((3, size, size))
    for _ in range(4):
        fy, fx = rng.uniform(0.5, 3.0, size=2) * 2 * np.pi / size
        phase = rng.uniform(0, 2 * np.pi)
        weights = rng.uniform(0.3, 1.0, size=3)  # per-color amplitude
        wave = np.cos(fy * yy + fx * xx + phase)
        tex += weights[:, None, None] * wave[None]
    return tex / np.abs(tex).max()


def _toy_split(cfg: ExperimentConfig, per_class: int, split: str,
               split_offset: int) -> LabeledImageSet:
    size = cfg.image_size
    images = np.empty((cfg.num_classes * per_class, 3, size, size), dtype=np.float32)
    labels = np.empty(cfg.num_classes * per_class, dtype=np.int64)
    for k in range(cfg.num_classes):
        tex_rng = np.random.default_rng([cfg.seed, k, 1000])
        texture = _class_texture(tex_rng, size)
        # class-identifying global statistics: an evenly spread base level
        # and a per-channel tint on top of the class texture
        if cfg.num_classes > 1:
            base = 0.35 + 0.30 * k / (cfg.num_classes - 1)
        else:
            base = 0.5
        tint = 0.08 * tex_rng.uniform(-1.0, 1.0, size=3)
        img_rng = np.random.default_rng([cfg.seed, k, split_offset])
        for i in range(per_class):
            row = k * per_class + i
            dy, dx = img_rng.integers(0, size, size=2)
            shifted = np.roll(texture, (dy, dx), axis=(1, 2))
            amp = img_rng.uniform(0.20, 0.30)
            noise = 0.02 * img_rng.standard_normal((3, size, size))
            images[row] = np.clip(
                base + tint[:, None, None] + amp * shifted + noise, 0.0, 1.0)
            labels[row] = k
    return LabeledImageSet(
        images=torch.from_numpy(images),
        labels=torch.from_numpy(labels),
        split=split,
    )


def _load_torchvision(cfg: ExperimentConfig) -> tuple[LabeledImageSet, LabeledImageSet]:
    import torchvision

    root = Path(cfg.data_dir)
    if cfg.dataset_name == "stl10":
        cls, kwargs = torchvision.datasets.STL10, {"split": "train"}
        eval_kwargs = {"split": "test"}
    else:
        cls, kwargs = torchvision.datasets.CIFAR10, {"train": True}
        eval_kwargs = {"train": False}
    try:
        train_ds = cls(root=str(root), download=False, **kwargs)
        eval_ds = cls(root=str(root), download=False, **eval_kwargs)
    except (RuntimeError, FileNotFoundError) as exc:
        raise FileNotFoundError(
            f"{cfg.dataset_name} not found under {root}; place the dataset "
            f"files there (torchvision layout) or use dataset_name=toy_subset"
        ) from exc

    def convert(ds, split: str) -> LabeledImageSet:
        imgs, labels = [], []
        for img, label in ds:
            arr = np.asarray(img, dtype=np.float32) / 255.0  # HWC in [0,1]
            imgs.append(arr.transpose(2, 0, 1))
            labels.append(int(label))
        return LabeledImageSet(
            images=torch.from_numpy(np.stack(imgs)),
            labels=torch.tensor(labels, dtype=torch.int64),
            split=split,
        )

    return convert(train_ds, "train"), convert(eval_ds, "eval")


def load_dataset(cfg: ExperimentConfig) -> tuple[LabeledImageSet, LabeledImageSet]:
    """Return (train, eval) splits scaled to [0,1], deterministic per seed."""
    if cfg.dataset_name == "toy_subset":
        train = _toy_split(cfg, cfg.toy_per_class, "train", split_offset=0)
        evl = _toy_split(cfg, cfg.toy_eval_per_class, "eval", split_offset=1)
        return train, evl
    return _load_torchvision(cfg)
