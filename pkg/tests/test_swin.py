"""Windowed-attention backbone pieces."""

from __future__ import annotations

import pytest
import torch

from relayjscc.swin import (PatchDivision, PatchEmbed, PatchMerging, SwinBlock,
                            block_stack, window_partition, window_reverse)


def test_window_partition_shapes():
    x = torch.randn(2, 8, 8, 5)
    win = window_partition(x, 4)
    assert win.shape == (2 * 4, 16, 5)


def test_window_partition_reverse_involution():
    x = torch.randn(3, 8, 12, 7)
    for ws in (1, 2, 4):
        back = window_reverse(window_partition(x, ws), ws, 8, 12)
        assert torch.equal(back, x)


def test_window_partition_groups_neighbors():
    # single channel counts the flat pixel index; first window must hold the
    # top-left ws x ws square in row-major order
    x = torch.arange(16, dtype=torch.float32).view(1, 4, 4, 1)
    win = window_partition(x, 2)
    assert win[0, :, 0].tolist() == [0.0, 1.0, 4.0, 5.0]


def test_block_preserves_shape():
    blk = SwinBlock(dim=8, grid=(4, 4), num_heads=2, ws=2)
    x = torch.randn(3, 16, 8)
    assert blk(x).shape == x.shape


def test_block_rejects_bad_grid():
    with pytest.raises(ValueError, match="divide"):
        SwinBlock(dim=8, grid=(6, 6), num_heads=2, ws=4)


def test_shift_disabled_when_window_covers_grid():
    blk = SwinBlock(dim=8, grid=(4, 4), num_heads=2, ws=4, shift=2)
    assert blk.shift == 0
    assert blk.attn_mask is None


def test_shifted_block_differs_from_plain():
    torch.manual_seed(0)
    plain = SwinBlock(dim=8, grid=(8, 8), num_heads=2, ws=4, shift=0)
    shifted = SwinBlock(dim=8, grid=(8, 8), num_heads=2, ws=4, shift=2)
    shifted.load_state_dict(plain.state_dict())
    x = torch.randn(2, 64, 8)
    assert not torch.allclose(plain(x), shifted(x))
    assert shifted.attn_mask is not None


def test_block_stack_alternates_shift():
    blocks = block_stack(4, dim=8, grid=(8, 8), num_heads=2, ws=4)
    assert [b.shift for b in blocks] == [0, 2, 0, 2]


def test_patch_embed_shape():
    emb = PatchEmbed(dim=12)
    out = emb(torch.randn(2, 3, 16, 16))
    assert out.shape == (2, 64, 12)


def test_patch_merging_shape():
    merge = PatchMerging(dim=8, grid=(8, 8))
    out = merge(torch.randn(2, 64, 8))
    assert out.shape == (2, 16, 16)


def test_patch_division_shape():
    div = PatchDivision(dim=16, out_dim=8, grid=(4, 4))
    out = div(torch.randn(2, 16, 16))
    assert out.shape == (2, 64, 8)


def test_merge_then_divide_round_trip_shape():
    merge = PatchMerging(dim=8, grid=(4, 4))
    div = PatchDivision(dim=16, out_dim=8, grid=(2, 2))
    x = torch.randn(2, 16, 8)
    assert div(merge(x)).shape == x.shape


def test_division_scatter_layout():
    # each output position on the upsampled 2h x 2w grid must depend on
    # exactly the token covering its 2x2 quadrant
    h = w = 2
    div = PatchDivision(dim=3, out_dim=1, grid=(h, w))
    for p in range(4 * h * w):
        x = torch.randn(1, h * w, 3, requires_grad=True)
        div(x)[0, p, 0].backward()
        touched = x.grad[0].abs().sum(dim=1).nonzero().flatten().tolist()
        row, col = divmod(p, 2 * w)
        assert touched == [(row // 2) * w + (col // 2)]


def test_attention_mask_blocks_cross_region_pairs():
    blk = SwinBlock(dim=8, grid=(8, 8), num_heads=2, ws=4, shift=2)
    mask = blk.attn_mask
    assert mask is not None
    assert set(mask.unique().tolist()) == {-100.0, 0.0}


def test_block_gradients_flow():
    blk = SwinBlock(dim=8, grid=(4, 4), num_heads=2, ws=2)
    x = torch.randn(2, 16, 8, requires_grad=True)
    blk(x).sum().backward()
    assert x.grad is not None
    assert torch.isfinite(x.grad).all()
