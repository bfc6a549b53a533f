"""Complex-baseband link simulation.

Each link applies, element-wise on the complex symbols,

    y_i = d^(-a) * h_i * x_i + n_i

with h_i ~ CN(0,1) i.i.d. for Rayleigh fading (h_i = 1 for AWGN) and
n_i ~ CN(0, sigma^2) i.i.d. noise.  Receivers know the realized gains
(perfect CSI) and undo fading with a per-symbol MMSE equalizer.  All ops are
plain tensor math, so gradients flow through the channel during training.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
from torch import Tensor


@dataclass(frozen=True)
class LinkConfig:
    """One link: normalized distance, path-loss exponent, fading, noise."""

    distance: float
    exponent: float
    fading: str  # "awgn" | "rayleigh"
    noise_var: float

    def __post_init__(self) -> None:
        if not (0.0 < self.distance <= 1.0):
            raise ValueError(f"link distance must lie in (0, 1], got {self.distance}")
        if self.noise_var < 0.0:
            raise ValueError(f"noise variance must be >= 0, got {self.noise_var}")
        if self.fading not in ("awgn", "rayleigh"):
            raise ValueError(f"unknown fading kind: {self.fading!r}")

    @property
    def path_gain(self) -> float:
        return self.distance ** (-self.exponent)


@dataclass
class ChannelSymbols:
    """Power-normalized complex transmit signal, shape (..., n, l/2)."""

    values: Tensor
    power_budget: float


@dataclass
class ReceivedSignal:
    """Post-channel samples plus realized small-scale gains (CSI).

    ``gains`` holds h_i only; the deterministic d^(-a) factor lives in
    ``link``.  For AWGN the gains are identically one.
    """

    values: Tensor
    gains: Tensor
    link: LinkConfig


def snr_to_noise_var(snr_db: float, power: float) -> float:
    """Noise variance for a target SNR: sigma^2 = P / 10^(snr/10).

    All three links share this variance (equal noise levels across links).
    """
    if power <= 0:
        raise ValueError(f"signal power must be > 0, got {power}")
    return power / (10.0 ** (snr_db / 10.0))


def power_normalize(raw: Tensor, power: float = 1.0) -> ChannelSymbols:
    """Scale each sample's symbols to mean per-symbol power exactly ``power``.

    The leading dimension (if 3-D) is the batch; each (n, l/2) transmission
    is normalized independently so every transmission satisfies the power
    constraint on its own.
    """
    if raw.ndim == 2:
        norms = torch.linalg.vector_norm(raw)
        count = raw.numel()
    elif raw.ndim == 3:
        norms = torch.linalg.vector_norm(raw.reshape(raw.shape[0], -1), dim=1)
        norms = norms.view(-1, 1, 1)
        count = raw.shape[1] * raw.shape[2]
    else:
        raise ValueError(f"expected (n, l/2) or (batch, n, l/2), got {tuple(raw.shape)}")
    if bool((norms == 0).any()):
        raise ValueError("cannot power-normalize an all-zero signal")
    scale = math.sqrt(power * count) / norms
    return ChannelSymbols(values=raw * scale, power_budget=power)


def apply_link(x: ChannelSymbols, link: LinkConfig,
               rng: torch.Generator) -> ReceivedSignal:
    """Transmit symbols over one link with an explicit random source."""
    v = x.values
    if link.fading == "rayleigh":
        h = torch.randn(v.shape, dtype=v.dtype, generator=rng, device=v.device)
    else:
        h = torch.ones_like(v)
    y = link.path_gain * h * v
    if link.noise_var > 0.0:
        noise = torch.randn(v.shape, dtype=v.dtype, generator=rng,
                            device=v.device)
        y = y + math.sqrt(link.noise_var) * noise
    return ReceivedSignal(values=y, gains=h, link=link)


def mmse_equalize(y: ReceivedSignal, power: float) -> Tensor:
    """Per-symbol MMSE estimate x_hat = conj(g) y / (|g|^2 + sigma^2/P).

    The effective gain g_i = d^(-a) h_i combines large- and small-scale
    fading; the regularized denominator never vanishes while sigma^2 > 0.
    """
    g = y.link.path_gain * y.gains
    denom = g.abs() ** 2 + y.link.noise_var / power
    return g.conj() * y.values / denom


def front_end(y: ReceivedSignal, power: float) -> Tensor:
    """Receiver front end: MMSE-equalize Rayleigh links, pass AWGN through."""
    if y.link.fading == "rayleigh":
        return mmse_equalize(y, power)
    return y.values


def complex_to_real(x: Tensor) -> Tensor:
    """Pack (..., n, l/2) complex into (..., n, l) real: [re..., im...]."""
    return torch.cat([x.real, x.imag], dim=-1)


def real_to_complex(x: Tensor) -> Tensor:
    """Inverse of complex_to_real; requires an even last dimension."""
    half = x.shape[-1]
    if half % 2 != 0:
        raise ValueError(f"real patch length must be even, got {half}")
    half //= 2
    return torch.complex(x[..., :half], x[..., half:])
