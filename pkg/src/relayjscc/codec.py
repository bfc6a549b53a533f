"""Learned source/channel codec: two-stage Swin encoder and mirrored decoder.

Encoder: 2x2 patch embed (width c1) -> n1 blocks -> merge (width c2 = 2*c1)
-> n2 blocks -> per-token projection to l real values -> complex packing and
per-sample power normalization.  Decoder mirrors it and clamps to [0,1].
"""

from __future__ import annotations

from dataclasses import dataclass

import torch.nn as nn
from torch import Tensor

from . import channel
from .config import CodecDims, ExperimentConfig, attention_heads, derive_dims
from .swin import PatchDivision, PatchEmbed, PatchMerging, block_stack


@dataclass(frozen=True)
class CodecSpec:
    """Static codec geometry shared by every network in one experiment."""

    image_size: int
    blocks: tuple[int, int]
    widths: tuple[int, int]
    window: int
    dims: CodecDims

    @classmethod
    def from_config(cls, cfg: ExperimentConfig) -> "CodecSpec":
        return cls(
            image_size=cfg.image_size,
            blocks=tuple(cfg.stage_blocks),
            widths=tuple(cfg.stage_widths),
            window=cfg.resolved_window_size(),
            dims=derive_dims(cfg),
        )

    @property
    def grid1(self) -> tuple[int, int]:
        return (self.image_size // 2, self.image_size // 2)

    @property
    def grid2(self) -> tuple[int, int]:
        return (self.image_size // 4, self.image_size // 4)


class Encoder(nn.Module):
    """Image (B,3,H,W) -> power-normalized complex symbols (B, n, l/2)."""

    def __init__(self, spec: CodecSpec, power: float = 1.0):
        super().__init__()
        c1, c2 = spec.widths
        n1, n2 = spec.blocks
        self.spec = spec
        self.power = power
        self.embed = PatchEmbed(c1)
        self.stage1 = block_stack(n1, c1, spec.grid1, attention_heads(c1), spec.window)
        self.merge = PatchMerging(c1, spec.grid1)
        self.stage2 = block_stack(n2, c2, spec.grid2, attention_heads(c2), spec.window)
        self.proj = nn.Linear(c2, spec.dims.patch_len_real)

    def features(self, img: Tensor) -> Tensor:
        """Backbone only: (B,3,H,W) -> (B, n, c2), no projection."""
        x = self.embed(img)
        for blk in self.stage1:
            x = blk(x)
        x = self.merge(x)
        for blk in self.stage2:
            x = blk(x)
        return x

    def forward(self, img: Tensor) -> channel.ChannelSymbols:
        x = self.proj(self.features(img))
        return channel.power_normalize(channel.real_to_complex(x), self.power)


class Decoder(nn.Module):
    """Real patches (B, n, l) -> image (B,3,H,W) clamped to [0,1]."""

    def __init__(self, spec: CodecSpec):
        super().__init__()
        c1, c2 = spec.widths
        n1, n2 = spec.blocks
        self.spec = spec
        self.expand = nn.Linear(spec.dims.patch_len_real, c2)
        self.stage2 = block_stack(n2, c2, spec.grid2, attention_heads(c2), spec.window)
        self.divide2 = PatchDivision(c2, c1, spec.grid2)
        self.stage1 = block_stack(n1, c1, spec.grid1, attention_heads(c1), spec.window)
        self.divide1 = PatchDivision(c1, 3, spec.grid1)

    def head(self, y: Tensor) -> Tensor:
        """FC expansion + stage-2 blocks + upsample: (B,n,l) -> (B,4n,c1)."""
        x = self.expand(y)
        for blk in self.stage2:
            x = blk(x)
        return self.divide2(x)

    def tail(self, x: Tensor) -> Tensor:
        """Stage-1 blocks + final upsample to the image, clamped to [0,1]."""
        for blk in self.stage1:
            x = blk(x)
        x = self.divide1(x)
        b = x.shape[0]
        size = self.spec.image_size
        img = x.view(b, size, size, 3).permute(0, 3, 1, 2)
        return img.clamp(0.0, 1.0)

    def forward(self, y: Tensor) -> Tensor:
        return self.tail(self.head(y))
