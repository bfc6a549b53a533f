"""Shared fixtures: small configurations sized for fast unit tests."""

from __future__ import annotations

import pytest
import torch

from relayjscc.codec import CodecSpec
from relayjscc.config import ExperimentConfig


@pytest.fixture(autouse=True)
def _fixed_torch_seed():
    torch.manual_seed(0)


@pytest.fixture
def tiny_cfg() -> ExperimentConfig:
    """16x16 images, one block per stage: seconds-fast structural tests."""
    return ExperimentConfig(
        image_size=16, num_classes=2, stage_blocks=[1, 1],
        stage_widths=[8, 16], toy_per_class=6, toy_eval_per_class=3,
        epochs_per_stage=[1, 1, 1], batch_size=4)


@pytest.fixture
def tiny_spec(tiny_cfg) -> CodecSpec:
    return CodecSpec.from_config(tiny_cfg)
