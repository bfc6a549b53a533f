"""Relay-side image classifier and destination-side signal classifier."""

from __future__ import annotations

import torch.nn as nn
from torch import Tensor

from .config import attention_heads
from .codec import CodecSpec, Encoder
from .swin import block_stack


def _mlp_head(width: int, num_classes: int) -> nn.Sequential:
    return nn.Sequential(
        nn.Linear(width, width), nn.GELU(), nn.Linear(width, num_classes))


class ImageClassifier(nn.Module):
    """Encoder-style backbone, token mean pooling, MLP to class logits."""

    def __init__(self, spec: CodecSpec, num_classes: int):
        super().__init__()
        self.backbone = Encoder(spec)  # same architecture, independent weights
        self.head = _mlp_head(spec.widths[1], num_classes)

    def forward(self, img: Tensor) -> Tensor:
        feats = self.backbone.features(img)  # (B, n, c2)
        return self.head(feats.mean(dim=1))


class SignalClassifier(nn.Module):
    """Classifies received channel patches (B, n, l) directly.

    Patch embedding is replaced by a linear lift from the patch length to
    the stage-2 width; the stage-2 blocks, pooling and MLP head are kept.
    """

    def __init__(self, spec: CodecSpec, num_classes: int):
        super().__init__()
        c2 = spec.widths[1]
        self.lift = nn.Linear(spec.dims.patch_len_real, c2)
        self.blocks = block_stack(
            spec.blocks[1], c2, spec.grid2, attention_heads(c2), spec.window)
        self.head = _mlp_head(c2, num_classes)

    def forward(self, y: Tensor) -> Tensor:
        x = self.lift(y)
        for blk in self.blocks:
            x = blk(x)
        return self.head(x.mean(dim=1))
