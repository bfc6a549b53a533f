"""Class-conditioned codec: label-gated variants of the encoder and decoder.

A label gate maps a class id through a small FC stack to a per-channel gain
vector, broadcast across all tokens and multiplied in element-wise.  The
encoder gates the output of both stages; the decoder gates only the output
of its second stage.  With all gates forced to one, the class-aided codec
computes exactly the plain codec on the same backbone weights.
"""

from __future__ import annotations

import torch
import torch.nn as nn
import torch.nn.functional as F
from torch import Tensor

from . import channel
from .codec import CodecSpec, Decoder, Encoder


class LabelGate(nn.Module):
    """Class id -> multiplicative gain vector of the local token width.

    One-hot encoding through two FC layers with a GELU between; the final
    layer is purely linear so gates may amplify as well as attenuate.
    """

    def __init__(self, num_classes: int, width: int):
        super().__init__()
        self.num_classes = num_classes
        self.net = nn.Sequential(
            nn.Linear(num_classes, width), nn.GELU(), nn.Linear(width, width))

    def forward(self, z: Tensor) -> Tensor:
        if z.ndim != 1:
            raise ValueError(f"labels must be a 1-D batch, got shape {tuple(z.shape)}")
        if bool((z < 0).any()) or bool((z >= self.num_classes).any()):
            raise ValueError(
                f"label out of range [0, {self.num_classes}): {z.tolist()}")
        onehot = F.one_hot(z, self.num_classes).to(self.net[0].weight.dtype)
        return self.net(onehot)


def apply_gate(tokens: Tensor, gate: Tensor) -> Tensor:
    """Broadcast a (B, width) gate over (B, tokens, width) features."""
    return tokens * gate.unsqueeze(1)


class ClassAidedEncoder(nn.Module):
    """Encoder with label gates at the end of each stage."""

    def __init__(self, spec: CodecSpec, num_classes: int, power: float = 1.0):
        super().__init__()
        c1, c2 = spec.widths
        self.backbone = Encoder(spec, power)
        self.gate1 = LabelGate(num_classes, c1)
        self.gate2 = LabelGate(num_classes, c2)

    def forward(self, img: Tensor, z: Tensor) -> channel.ChannelSymbols:
        enc = self.backbone
        x = enc.embed(img)
        for blk in enc.stage1:
            x = blk(x)
        x = apply_gate(x, self.gate1(z))
        x = enc.merge(x)
        for blk in enc.stage2:
            x = blk(x)
        x = apply_gate(x, self.gate2(z))
        x = enc.proj(x)
        return channel.power_normalize(channel.real_to_complex(x), enc.power)


class ClassAidedDecoder(nn.Module):
    """Decoder with one label gate on the output of its second stage."""

    def __init__(self, spec: CodecSpec, num_classes: int):
        super().__init__()
        c1, _ = spec.widths
        self.backbone = Decoder(spec)
        self.gate = LabelGate(num_classes, c1)

    def forward(self, y: Tensor, z: Tensor) -> Tensor:
        x = self.backbone.head(y)
        x = apply_gate(x, self.gate(z))
        return self.backbone.tail(x)


@torch.no_grad()
def force_unit_gates(gate: LabelGate) -> None:
    """Contrive a gate's weights so it emits exactly 1 for every label."""
    final = gate.net[-1]
    final.weight.zero_()
    final.bias.fill_(1.0)
