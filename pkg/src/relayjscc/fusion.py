"""Mutual attention: fuse direct-link and relay-link received signals.

Both links arrive as real patches (B, n, l).  Per patch group j, independent
FC maps project the direct-link group to keys/values and the relay-link
group to queries; each projection is reshaped into heads x tokens x head_dim
so the softmax ranges over several direct-link tokens rather than collapsing
to a scalar.  Group outputs are concatenated and mixed by one final FC back
to (B, n, l).
"""

from __future__ import annotations

import math

import torch
import torch.nn as nn
from torch import Tensor


def scaled_softmax_attention(q: Tensor, k: Tensor, v: Tensor) -> Tensor:
    """softmax(q k^T / sqrt(d)) v over the last two dims (tokens, d)."""
    d = q.shape[-1]
    scores = q @ k.transpose(-2, -1) / math.sqrt(d)
    return scores.softmax(dim=-1) @ v


class GroupLinear(nn.Module):
    """n independent FC maps, one per patch group: (B, n, i) -> (B, n, o)."""

    def __init__(self, n_groups: int, in_dim: int, out_dim: int):
        super().__init__()
        scale = 1.0 / math.sqrt(in_dim)
        self.weight = nn.Parameter(
            torch.empty(n_groups, in_dim, out_dim).uniform_(-scale, scale))
        self.bias = nn.Parameter(torch.zeros(n_groups, out_dim))

    def forward(self, x: Tensor) -> Tensor:
        return torch.einsum("bni,nio->bno", x, self.weight) + self.bias


class MutualAttention(nn.Module):
    """Cross-link combiner; output shape always matches the relay input."""

    def __init__(self, n_groups: int, patch_len: int, heads: int = 2,
                 head_dim: int = 4, proj_len: int = 32):
        super().__init__()
        if proj_len % (heads * head_dim) != 0:
            raise ValueError(
                f"proj_len {proj_len} not divisible by heads*head_dim "
                f"{heads * head_dim}")
        self.heads = heads
        self.head_dim = head_dim
        self.tokens = proj_len // (heads * head_dim)
        self.n_groups = n_groups
        self.patch_len = patch_len
        self.to_k = GroupLinear(n_groups, patch_len, proj_len)
        self.to_v = GroupLinear(n_groups, patch_len, proj_len)
        self.to_q = GroupLinear(n_groups, patch_len, proj_len)
        self.out = nn.Linear(n_groups * proj_len, n_groups * patch_len)

    def _split(self, x: Tensor) -> Tensor:
        """(B, n, proj) -> (B, n, heads, tokens, head_dim)."""
        b, n, _ = x.shape
        return x.view(b, n, self.heads, self.tokens, self.head_dim)

    def forward(self, y_sd: Tensor, y_rd: Tensor) -> Tensor:
        if y_sd.shape != y_rd.shape:
            raise ValueError(
                f"link shapes differ: {tuple(y_sd.shape)} vs {tuple(y_rd.shape)}")
        b, n, l = y_rd.shape
        if n != self.n_groups or l != self.patch_len:
            raise ValueError(
                f"expected (B, {self.n_groups}, {self.patch_len}), "
                f"got {tuple(y_rd.shape)}")
        k = self._split(self.to_k(y_sd))
        v = self._split(self.to_v(y_sd))
        q = self._split(self.to_q(y_rd))
        fused = scaled_softmax_attention(q, k, v)  # (B, n, h, t, d)
        fused = fused.reshape(b, n * self.heads * self.tokens * self.head_dim)
        return self.out(fused).view(b, n, l)
