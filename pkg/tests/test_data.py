"""Dataset synthesis and ingestion."""

from __future__ import annotations

import numpy as np
import pytest
import torch

from relayjscc.config import ExperimentConfig
from relayjscc.data import LabeledImageSet, load_dataset


@pytest.fixture
def toy_cfg():
    return ExperimentConfig(image_size=16, num_classes=3,
                            toy_per_class=8, toy_eval_per_class=4,
                            stage_blocks=[1, 1], stage_widths=[8, 16])


def test_toy_shapes_and_ranges(toy_cfg):
    train, evl = load_dataset(toy_cfg)
    assert train.images.shape == (24, 3, 16, 16)
    assert evl.images.shape == (12, 3, 16, 16)
    assert train.images.dtype == torch.float32
    assert float(train.images.min()) >= 0.0
    assert float(train.images.max()) <= 1.0
    assert train.labels.dtype == torch.int64
    assert set(train.labels.tolist()) == {0, 1, 2}
    assert train.split == "train" and evl.split == "eval"


def test_toy_per_class_counts(toy_cfg):
    train, evl = load_dataset(toy_cfg)
    assert train.per_class_counts == {0: 8, 1: 8, 2: 8}
    assert evl.per_class_counts == {0: 4, 1: 4, 2: 4}


def test_toy_deterministic_per_seed(toy_cfg):
    a_train, a_eval = load_dataset(toy_cfg)
    b_train, b_eval = load_dataset(toy_cfg)
    assert torch.equal(a_train.images, b_train.images)
    assert torch.equal(a_train.labels, b_train.labels)
    assert torch.equal(a_eval.images, b_eval.images)


def test_toy_seed_changes_data(toy_cfg):
    a, _ = load_dataset(toy_cfg)
    b, _ = load_dataset(toy_cfg.with_updates(seed=1))
    assert not torch.equal(a.images, b.images)


def test_toy_splits_differ(toy_cfg):
    train, evl = load_dataset(toy_cfg)
    assert not torch.equal(train.images[:12], evl.images)


def test_toy_classes_visually_distinct(toy_cfg):
    train, _ = load_dataset(toy_cfg)
    means = [train.images[train.labels == k].mean(dim=0) for k in range(3)]
    # shifted copies of different textures: per-class pixel statistics differ
    for i in range(3):
        for j in range(i + 1, 3):
            assert float((means[i] - means[j]).abs().mean()) > 1e-3


def test_batches_cover_everything(toy_cfg):
    train, _ = load_dataset(toy_cfg)
    seen = []
    for imgs, labels in train.batches(5):
        assert imgs.shape[0] == labels.shape[0] <= 5
        seen.append(labels)
    assert torch.equal(torch.cat(seen), train.labels)


def test_batches_shuffle_is_a_permutation(toy_cfg):
    train, _ = load_dataset(toy_cfg)
    rng = np.random.default_rng(0)
    labels = torch.cat([lb for _, lb in train.batches(5, rng=rng)])
    assert not torch.equal(labels, train.labels)
    assert sorted(labels.tolist()) == sorted(train.labels.tolist())


def test_labeled_set_validation():
    with pytest.raises(ValueError, match="images"):
        LabeledImageSet(images=torch.zeros(2, 1, 4, 4),
                        labels=torch.zeros(2, dtype=torch.int64), split="train")
    with pytest.raises(ValueError, match="count"):
        LabeledImageSet(images=torch.zeros(2, 3, 4, 4),
                        labels=torch.zeros(3, dtype=torch.int64), split="train")


def test_missing_torchvision_dataset_is_explicit(tmp_path):
    cfg = ExperimentConfig(dataset_name="stl10", image_size=96, num_classes=10,
                           stage_widths=[128, 256],
                           data_dir=str(tmp_path / "absent"))
    with pytest.raises(FileNotFoundError, match="stl10"):
        load_dataset(cfg)
