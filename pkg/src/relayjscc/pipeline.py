"""End-to-end forward graphs and the three training losses.

Two systems are defined.  The full scheme routes one source transmission
through the relay (decode, classify, class-conditioned re-encode) and the
direct link, fuses both received signals at the destination for
classification, and decodes the relay signal with the class result.  The
relay-only baseline keeps the same stage-1 codec but drops the relay
classifier, the fusion module and the class conditioning.

In both systems the stage-1/2 front (source encoder, relay decoder) is
evaluated without gradients inside the full forward: stage 3 trains on relay
reconstructions as data.  Stage-1/2 training drives those submodules
directly and does not go through these graphs.

Labels enter a forward pass only via ``forward_train``; ``forward_infer``
takes no label argument at all, so predicted classes are the only
conditioning information available at inference.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn as nn
import torch.nn.functional as F
from torch import Tensor

from .channel import (LinkConfig, ReceivedSignal, apply_link, complex_to_real,
                      front_end, snr_to_noise_var)
from .class_codec import ClassAidedDecoder, ClassAidedEncoder
from .classifiers import ImageClassifier, SignalClassifier
from .codec import CodecSpec, Decoder, Encoder
from .config import ExperimentConfig
from .fusion import MutualAttention

SIGNAL_POWER = 1.0  # P_s = P_r; the SNR definition normalizes against it

STAGES = (1, 2, 3)


@dataclass(frozen=True)
class LinkSet:
    """The three links of one experiment point."""

    sr: LinkConfig
    sd: LinkConfig
    rd: LinkConfig


def links_from_config(cfg: ExperimentConfig) -> LinkSet:
    """Build all links with one shared noise variance from the target SNR."""
    sigma2 = snr_to_noise_var(cfg.snr_db, SIGNAL_POWER)

    def link(distance: float) -> LinkConfig:
        return LinkConfig(distance=distance, exponent=cfg.path_loss_exp,
                          fading=cfg.fading, noise_var=sigma2)

    return LinkSet(sr=link(cfg.d_sr), sd=link(cfg.d_sd), rd=link(cfg.d_rd))


@dataclass
class ForwardOutputs:
    """Everything one end-to-end pass produces.

    ``relay_cond_labels`` / ``dest_cond_labels`` record which labels were
    fed to the class-conditioned codec halves (ground truth in training,
    argmax predictions at inference); they exist so tests and diagnostics
    can verify the label routing.
    """

    relay_recon: Tensor
    relay_logits: Tensor | None
    dest_logits: Tensor
    dest_recon: Tensor
    received: dict[str, ReceivedSignal]
    relay_cond_labels: Tensor | None = None
    dest_cond_labels: Tensor | None = None


class MultiTaskRelaySystem(nn.Module):
    """Full scheme: class-focused relay forward + two-link combining."""

    def __init__(self, spec: CodecSpec, num_classes: int,
                 dest_decoder_input: str = "rd"):
        super().__init__()
        self.spec = spec
        self.dest_decoder_input = dest_decoder_input
        self.source_encoder = Encoder(spec, SIGNAL_POWER)
        self.relay_decoder = Decoder(spec)
        self.relay_classifier = ImageClassifier(spec, num_classes)
        self.relay_encoder = ClassAidedEncoder(spec, num_classes, SIGNAL_POWER)
        self.dest_decoder = ClassAidedDecoder(spec, num_classes)
        self.dest_classifier = SignalClassifier(spec, num_classes)
        self.combiner = MutualAttention(
            spec.dims.n_patches, spec.dims.patch_len_real)

    def stage_modules(self, stage: int) -> dict[str, nn.Module]:
        if stage == 1:
            return {"source_encoder": self.source_encoder,
                    "relay_decoder": self.relay_decoder}
        if stage == 2:
            return {"relay_classifier": self.relay_classifier}
        if stage == 3:
            return {"relay_encoder": self.relay_encoder,
                    "dest_decoder": self.dest_decoder,
                    "dest_classifier": self.dest_classifier,
                    "combiner": self.combiner}
        raise ValueError(f"no stage {stage}")

    def _front(self, images: Tensor, links: LinkSet,
               rng: torch.Generator) -> tuple[Tensor, ReceivedSignal, ReceivedSignal]:
        """Source broadcast and relay reconstruction, gradient-free."""
        with torch.no_grad():
            xs = self.source_encoder(images)
            y_sr = apply_link(xs, links.sr, rng)
            y_sd = apply_link(xs, links.sd, rng)
            relay_in = complex_to_real(front_end(y_sr, SIGNAL_POWER))
            relay_recon = self.relay_decoder(relay_in)
        return relay_recon, y_sr, y_sd

    def _back(self, relay_recon: Tensor, relay_labels: Tensor,
              y_sd: ReceivedSignal, links: LinkSet, rng: torch.Generator):
        """Relay re-encode through RD link, then destination combining."""
        xr = self.relay_encoder(relay_recon, relay_labels)
        y_rd = apply_link(xr, links.rd, rng)
        sd_real = complex_to_real(front_end(y_sd, SIGNAL_POWER))
        rd_real = complex_to_real(front_end(y_rd, SIGNAL_POWER))
        fused = self.combiner(sd_real, rd_real)
        dest_logits = self.dest_classifier(fused)
        dec_in = fused if self.dest_decoder_input == "fused" else rd_real
        return y_rd, dec_in, dest_logits

    def forward_train(self, images: Tensor, labels: Tensor, links: LinkSet,
                      rng: torch.Generator) -> ForwardOutputs:
        """Training graph: ground-truth labels condition both codec halves."""
        relay_recon, y_sr, y_sd = self._front(images, links, rng)
        y_rd, dec_in, dest_logits = self._back(
            relay_recon, labels, y_sd, links, rng)
        dest_recon = self.dest_decoder(dec_in, labels)
        return ForwardOutputs(
            relay_recon=relay_recon, relay_logits=None,
            dest_logits=dest_logits, dest_recon=dest_recon,
            received={"sr": y_sr, "sd": y_sd, "rd": y_rd},
            relay_cond_labels=labels, dest_cond_labels=labels)

    @torch.no_grad()
    def forward_infer(self, images: Tensor, links: LinkSet,
                      rng: torch.Generator) -> ForwardOutputs:
        """Inference graph: only predicted classes reach the codecs."""
        relay_recon, y_sr, y_sd = self._front(images, links, rng)
        relay_logits = self.relay_classifier(relay_recon)
        z_relay = relay_logits.argmax(dim=1)
        y_rd, dec_in, dest_logits = self._back(
            relay_recon, z_relay, y_sd, links, rng)
        z_dest = dest_logits.argmax(dim=1)
        dest_recon = self.dest_decoder(dec_in, z_dest)
        return ForwardOutputs(
            relay_recon=relay_recon, relay_logits=relay_logits,
            dest_logits=dest_logits, dest_recon=dest_recon,
            received={"sr": y_sr, "sd": y_sd, "rd": y_rd},
            relay_cond_labels=z_relay, dest_cond_labels=z_dest)


class RelayOnlyBaseline(nn.Module):
    """Same stage-1 codec, plain re-encode, no direct link at the receiver."""

    def __init__(self, spec: CodecSpec, num_classes: int):
        super().__init__()
        self.spec = spec
        self.source_encoder = Encoder(spec, SIGNAL_POWER)
        self.relay_decoder = Decoder(spec)
        self.relay_encoder = Encoder(spec, SIGNAL_POWER)
        self.dest_decoder = Decoder(spec)
        self.dest_classifier = SignalClassifier(spec, num_classes)

    def stage_modules(self, stage: int) -> dict[str, nn.Module]:
        if stage == 1:
            return {"source_encoder": self.source_encoder,
                    "relay_decoder": self.relay_decoder}
        if stage == 2:
            return {}
        if stage == 3:
            return {"relay_encoder": self.relay_encoder,
                    "dest_decoder": self.dest_decoder,
                    "dest_classifier": self.dest_classifier}
        raise ValueError(f"no stage {stage}")

    def forward(self, images: Tensor, links: LinkSet,
                rng: torch.Generator) -> ForwardOutputs:
        with torch.no_grad():
            xs = self.source_encoder(images)
            y_sr = apply_link(xs, links.sr, rng)
            relay_in = complex_to_real(front_end(y_sr, SIGNAL_POWER))
            relay_recon = self.relay_decoder(relay_in)
        xr = self.relay_encoder(relay_recon)
        y_rd = apply_link(xr, links.rd, rng)
        rd_real = complex_to_real(front_end(y_rd, SIGNAL_POWER))
        dest_logits = self.dest_classifier(rd_real)
        dest_recon = self.dest_decoder(rd_real)
        return ForwardOutputs(
            relay_recon=relay_recon, relay_logits=None,
            dest_logits=dest_logits, dest_recon=dest_recon,
            received={"sr": y_sr, "rd": y_rd})


def build_system(cfg: ExperimentConfig, scheme: str) -> nn.Module:
    """Construct a system with seed-deterministic initialization."""
    torch.manual_seed(cfg.seed)
    spec = CodecSpec.from_config(cfg)
    if scheme == "multitask":
        system = MultiTaskRelaySystem(
            spec, cfg.num_classes, dest_decoder_input=cfg.dest_decoder_input)
    elif scheme == "baseline":
        system = RelayOnlyBaseline(spec, cfg.num_classes)
    else:
        raise ValueError(f"unknown scheme: {scheme!r} "
                         "(expected 'multitask' or 'baseline')")
    return system.to(cfg.device)


def reconstruction_loss(source: Tensor, recon: Tensor) -> Tensor:
    """Stage-1 loss: MSE averaged over batch and pixels."""
    if source.shape != recon.shape:
        raise ValueError(
            f"shape mismatch: {tuple(source.shape)} vs {tuple(recon.shape)}")
    return ((source - recon) ** 2).mean()


def classification_loss(logits: Tensor, labels: Tensor) -> Tensor:
    """Stage-2 loss: batch-averaged cross-entropy."""
    num_classes = logits.shape[-1]
    if bool((labels < 0).any()) or bool((labels >= num_classes).any()):
        raise ValueError(
            f"label out of range [0, {num_classes}): {labels.tolist()}")
    return F.cross_entropy(logits, labels)


def joint_loss(source: Tensor, recon: Tensor, logits: Tensor, labels: Tensor,
               lambda_cls: float) -> tuple[Tensor, Tensor, Tensor]:
    """Stage-3 loss: MSE + lambda * cross-entropy; components returned too."""
    mse = reconstruction_loss(source, recon)
    ce = classification_loss(logits, labels)
    return mse + lambda_cls * ce, mse, ce
