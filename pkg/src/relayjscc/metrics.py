"""Evaluation metrics: peak signal-to-noise ratio and top-1 accuracy."""

from __future__ import annotations

import torch
from torch import Tensor

PSNR_CAP_DB = 100.0


def psnr(reference: Tensor, estimate: Tensor,
         max_value: float = 1.0) -> tuple[float, bool]:
    """Batch-averaged per-image PSNR in dB for images scaled to [0, max].

    Each image contributes 10*log10(max^2 / mse); the batch value is the
    mean of the per-image values.  A zero-MSE image would be infinite, so
    it is capped at 100 dB and the returned flag reports that saturation
    occurred.
    """
    if reference.shape != estimate.shape:
        raise ValueError(
            f"shape mismatch: {tuple(reference.shape)} vs {tuple(estimate.shape)}")
    if reference.dim() < 2:
        raise ValueError("expected a batch of images, got a flat tensor")
    batch = reference.shape[0]
    err = (reference.double() - estimate.double()) ** 2
    mse = err.reshape(batch, -1).mean(dim=1)
    saturated = bool((mse == 0).any())
    peak = torch.full_like(mse, float(max_value) ** 2)
    per_image = torch.where(
        mse > 0,
        10.0 * torch.log10(peak / mse.clamp_min(torch.finfo(torch.double).tiny)),
        torch.full_like(mse, PSNR_CAP_DB),
    )
    per_image = per_image.clamp_max(PSNR_CAP_DB)
    return float(per_image.mean()), saturated


def accuracy(logits: Tensor, labels: Tensor) -> float:
    """Fraction of argmax predictions matching the integer labels."""
    if logits.shape[0] != labels.shape[0]:
        raise ValueError(
            f"batch mismatch: {logits.shape[0]} logits vs {labels.shape[0]} labels")
    if labels.numel() == 0:
        raise ValueError("empty batch")
    pred = logits.argmax(dim=1)
    return float((pred == labels).double().mean())
