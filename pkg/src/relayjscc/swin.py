"""Swin-style transformer backbone pieces shared by codecs and classifiers.

Token layout is (batch, tokens, width) with a static row-major grid fixed at
construction.  Blocks alternate plain and shifted window attention; grids are
validated to be divisible by the window size, so no padding paths exist.
"""

from __future__ import annotations

import torch
import torch.nn as nn
from torch import Tensor


def window_partition(x: Tensor, ws: int) -> Tensor:
    """(B, H, W, C) -> (B * num_windows, ws*ws, C)."""
    b, h, w, c = x.shape
    x = x.view(b, h // ws, ws, w // ws, ws, c)
    return x.permute(0, 1, 3, 2, 4, 5).reshape(-1, ws * ws, c)


def window_reverse(windows: Tensor, ws: int, h: int, w: int) -> Tensor:
    """Inverse of window_partition back to (B, H, W, C)."""
    b = windows.shape[0] // ((h // ws) * (w // ws))
    x = windows.view(b, h // ws, w // ws, ws, ws, -1)
    return x.permute(0, 1, 3, 2, 4, 5).reshape(b, h, w, -1)


class WindowAttention(nn.Module):
    """Multi-head self-attention within ws x ws windows, relative bias."""

    def __init__(self, dim: int, ws: int, num_heads: int):
        super().__init__()
        self.dim = dim
        self.ws = ws
        self.num_heads = num_heads
        self.scale = (dim // num_heads) ** -0.5

        self.qkv = nn.Linear(dim, 3 * dim)
        self.proj = nn.Linear(dim, dim)
        self.rel_bias = nn.Parameter(torch.zeros((2 * ws - 1) ** 2, num_heads))
        nn.init.trunc_normal_(self.rel_bias, std=0.02)

        coords = torch.stack(torch.meshgrid(
            torch.arange(ws), torch.arange(ws), indexing="ij")).flatten(1)
        rel = coords[:, :, None] - coords[:, None, :]
        rel = rel.permute(1, 2, 0) + (ws - 1)
        index = rel[..., 0] * (2 * ws - 1) + rel[..., 1]
        self.register_buffer("bias_index", index, persistent=False)

    def forward(self, x: Tensor, mask: Tensor | None = None) -> Tensor:
        bw, n, c = x.shape
        qkv = self.qkv(x).reshape(bw, n, 3, self.num_heads, c // self.num_heads)
        q, k, v = qkv.permute(2, 0, 3, 1, 4)
        attn = (q * self.scale) @ k.transpose(-2, -1)
        bias = self.rel_bias[self.bias_index.view(-1)].view(n, n, -1)
        attn = attn + bias.permute(2, 0, 1).unsqueeze(0).to(attn.dtype)
        if mask is not None:
            nw = mask.shape[0]
            attn = attn.view(bw // nw, nw, self.num_heads, n, n)
            attn = attn + mask.unsqueeze(1).unsqueeze(0).to(attn.dtype)
            attn = attn.view(bw, self.num_heads, n, n)
        attn = attn.softmax(dim=-1)
        out = (attn @ v).transpose(1, 2).reshape(bw, n, c)
        return self.proj(out)


class SwinBlock(nn.Module):
    """Pre-norm window attention + MLP block on a fixed token grid."""

    def __init__(self, dim: int, grid: tuple[int, int], num_heads: int,
                 ws: int, shift: int = 0, mlp_ratio: float = 4.0):
        super().__init__()
        h, w = grid
        if h % ws or w % ws:
            raise ValueError(f"window {ws} does not divide grid {grid}")
        if ws == h and ws == w and shift:
            shift = 0  # single window covers the grid; shifting is a no-op
        self.grid = grid
        self.ws = ws
        self.shift = shift
        self.norm1 = nn.LayerNorm(dim)
        self.attn = WindowAttention(dim, ws, num_heads)
        self.norm2 = nn.LayerNorm(dim)
        hidden = int(dim * mlp_ratio)
        self.mlp = nn.Sequential(
            nn.Linear(dim, hidden), nn.GELU(), nn.Linear(hidden, dim))
        self.register_buffer("attn_mask", self._make_mask(), persistent=False)

    def _make_mask(self) -> Tensor | None:
        if self.shift == 0:
            return None
        h, w = self.grid
        img = torch.zeros(1, h, w, 1)
        cnt = 0
        spans = (slice(0, -self.ws), slice(-self.ws, -self.shift),
                 slice(-self.shift, None))
        for hs in spans:
            for wsl in spans:
                img[:, hs, wsl, :] = cnt
                cnt += 1
        win = window_partition(img, self.ws).view(-1, self.ws * self.ws)
        mask = win.unsqueeze(1) - win.unsqueeze(2)
        return mask.masked_fill(mask != 0, -100.0).masked_fill(mask == 0, 0.0)

    def forward(self, x: Tensor) -> Tensor:
        h, w = self.grid
        b, n, c = x.shape
        shortcut = x
        x = self.norm1(x).view(b, h, w, c)
        if self.shift:
            x = torch.roll(x, (-self.shift, -self.shift), dims=(1, 2))
        x = window_partition(x, self.ws)
        x = self.attn(x, self.attn_mask)
        x = window_reverse(x, self.ws, h, w)
        if self.shift:
            x = torch.roll(x, (self.shift, self.shift), dims=(1, 2))
        x = shortcut + x.view(b, n, c)
        return x + self.mlp(self.norm2(x))


def block_stack(count: int, dim: int, grid: tuple[int, int], num_heads: int,
                ws: int) -> nn.ModuleList:
    """``count`` blocks alternating plain and shifted windows."""
    return nn.ModuleList(
        SwinBlock(dim, grid, num_heads, ws, shift=0 if i % 2 == 0 else ws // 2)
        for i in range(count))


class PatchEmbed(nn.Module):
    """2x2 non-overlapping patch embedding: image -> (B, HW/4, dim)."""

    def __init__(self, dim: int):
        super().__init__()
        self.proj = nn.Conv2d(3, dim, kernel_size=2, stride=2)
        self.norm = nn.LayerNorm(dim)

    def forward(self, img: Tensor) -> Tensor:
        x = self.proj(img)  # (B, dim, H/2, W/2)
        return self.norm(x.flatten(2).transpose(1, 2))


class PatchMerging(nn.Module):
    """2x downsample: concat 2x2 neighbors, project 4*dim -> 2*dim."""

    def __init__(self, dim: int, grid: tuple[int, int]):
        super().__init__()
        self.grid = grid
        self.norm = nn.LayerNorm(4 * dim)
        self.reduce = nn.Linear(4 * dim, 2 * dim, bias=False)

    def forward(self, x: Tensor) -> Tensor:
        h, w = self.grid
        b, _, c = x.shape
        x = x.view(b, h // 2, 2, w // 2, 2, c)
        x = x.permute(0, 1, 3, 2, 4, 5).reshape(b, (h // 2) * (w // 2), 4 * c)
        return self.reduce(self.norm(x))


class PatchDivision(nn.Module):
    """2x upsample: project dim -> 4*out_dim, scatter to 2x2 neighbors.

    Exact structural transpose of PatchMerging (pixel-shuffle layout).
    """

    def __init__(self, dim: int, out_dim: int, grid: tuple[int, int]):
        super().__init__()
        self.grid = grid
        self.out_dim = out_dim
        self.norm = nn.LayerNorm(dim)
        self.expand = nn.Linear(dim, 4 * out_dim, bias=False)

    def forward(self, x: Tensor) -> Tensor:
        h, w = self.grid
        b = x.shape[0]
        x = self.expand(self.norm(x)).view(b, h, w, 2, 2, self.out_dim)
        x = x.permute(0, 1, 3, 2, 4, 5).reshape(b, 4 * h * w, self.out_dim)
        return x
