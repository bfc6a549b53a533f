"""Three-stage training procedure.

Stage 1 fits the source encoder and relay decoder on reconstruction MSE
over the source-relay link.  Stage 2 fits the relay classifier on
cross-entropy, with stage-1 weights frozen.  Stage 3 fits the relay
re-encoder, destination decoder, destination classifier and the combiner
on the joint loss, with stages 1 and 2 frozen.  The relay-only baseline
has no stage-2 modules, so its stage 2 is an explicit no-op.

Stages must complete in order; a later stage refuses to start on
untrained prerequisites.  Every epoch emits one plain-text table row with
the loss components and the fixed-noise evaluation metrics, and each
completed stage is checkpointed.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn as nn

from .channel import apply_link, complex_to_real, front_end
from .checkpoint import load_checkpoint, save_checkpoint
from .config import ExperimentConfig, save_resolved_config
from .data import LabeledImageSet, load_dataset
from .metrics import accuracy, psnr
from .pipeline import (SIGNAL_POWER, STAGES, LinkSet, MultiTaskRelaySystem,
                       build_system, classification_loss, joint_loss,
                       links_from_config, reconstruction_loss)

log = logging.getLogger("relayjscc")

EVAL_RNG_SEED_OFFSET = 977


class StageOrderError(RuntimeError):
    """Raised when a stage is started before its prerequisites finished."""


class TrainingDiverged(RuntimeError):
    """Raised when a loss becomes non-finite."""


@dataclass
class EpochStats:
    stage: int
    epoch: int
    losses: dict[str, float] = field(default_factory=dict)
    eval_psnr: float | None = None
    eval_accuracy: float | None = None


def channel_rng(cfg: ExperimentConfig, stage: int, epoch: int) -> torch.Generator:
    """Deterministic per-(stage, epoch) generator for fading and noise."""
    g = torch.Generator()
    g.manual_seed(cfg.seed * 1_000_000 + stage * 100_000 + epoch)
    return g


def run_inference(system: nn.Module, images: torch.Tensor, links: LinkSet,
                  rng: torch.Generator):
    if isinstance(system, MultiTaskRelaySystem):
        return system.forward_infer(images, links, rng)
    with torch.no_grad():
        return system(images, links, rng)


def evaluate_system(system: nn.Module, data: LabeledImageSet, links: LinkSet,
                    cfg: ExperimentConfig) -> dict[str, float | bool]:
    """Fixed-noise evaluation: destination PSNR/accuracy over the split.

    The channel generator is reseeded from the experiment seed on every
    call, so repeated evaluations of the same weights agree exactly.
    """
    was_training = system.training
    system.eval()
    rng = torch.Generator()
    rng.manual_seed(cfg.seed + EVAL_RNG_SEED_OFFSET)
    n_total = 0
    psnr_sum = 0.0
    acc_sum = 0.0
    relay_acc_sum = 0.0
    has_relay_logits = False
    saturated = False
    for images, labels in data.batches(cfg.batch_size):
        images = images.to(cfg.device)
        labels = labels.to(cfg.device)
        out = run_inference(system, images, links, rng)
        bs = images.shape[0]
        p, sat = psnr(images, out.dest_recon)
        psnr_sum += p * bs
        saturated = saturated or sat
        acc_sum += accuracy(out.dest_logits, labels) * bs
        if out.relay_logits is not None:
            has_relay_logits = True
            relay_acc_sum += accuracy(out.relay_logits, labels) * bs
        n_total += bs
    system.train(was_training)
    result: dict[str, float | bool] = {
        "psnr_db": psnr_sum / n_total,
        "accuracy": acc_sum / n_total,
        "psnr_saturated": saturated,
    }
    if has_relay_logits:
        result["relay_accuracy"] = relay_acc_sum / n_total
    return result


class Trainer:
    """Runs the staged procedure for one (config, scheme) point."""

    def __init__(self, cfg: ExperimentConfig, scheme: str,
                 out_dir: str | None = None,
                 data: tuple[LabeledImageSet, LabeledImageSet] | None = None):
        cfg.validate()
        self.cfg = cfg
        self.scheme = scheme
        self.out_dir = out_dir
        self.system = build_system(cfg, scheme)
        self.links = links_from_config(cfg)
        self.train_data, self.eval_data = data if data is not None else load_dataset(cfg)
        self.completed_stage = 0
        self.history: list[EpochStats] = []
        if out_dir is not None:
            os.makedirs(out_dir, exist_ok=True)
            save_resolved_config(cfg, os.path.join(out_dir, "config.yaml"))

    # -- stage bookkeeping ------------------------------------------------

    def checkpoint_path(self, stage: int) -> str:
        if self.out_dir is None:
            raise ValueError("trainer has no output directory")
        return os.path.join(self.out_dir, f"{self.scheme}_stage{stage}.pt")

    def resume(self, path: str) -> int:
        """Load a stage checkpoint and adopt its completed-stage tag."""
        meta = load_checkpoint(path, self.system, expect_scheme=self.scheme)
        self.completed_stage = int(meta["stage"])
        return self.completed_stage

    def _set_trainable(self, stage: int) -> list[nn.Parameter]:
        """Freeze every module outside stage; return the trainable params."""
        params: list[nn.Parameter] = []
        for k in STAGES:
            trainable = k == stage
            for module in self.system.stage_modules(k).values():
                module.requires_grad_(trainable)
                module.train(trainable)
                if trainable:
                    params.extend(module.parameters())
        return params

    def _check_order(self, stage: int) -> None:
        if stage not in STAGES:
            raise ValueError(f"no stage {stage}")
        if stage > self.completed_stage + 1:
            raise StageOrderError(
                f"stage {stage} requires completed stage {stage - 1}, "
                f"but only stage {self.completed_stage} is done")

    # -- per-stage batch losses -------------------------------------------

    def _relay_reconstruction(self, images: torch.Tensor,
                              rng: torch.Generator) -> torch.Tensor:
        xs = self.system.source_encoder(images)
        y_sr = apply_link(xs, self.links.sr, rng)
        return self.system.relay_decoder(
            complex_to_real(front_end(y_sr, SIGNAL_POWER)))

    def _stage_loss(self, stage: int, images: torch.Tensor,
                    labels: torch.Tensor,
                    rng: torch.Generator) -> tuple[torch.Tensor, dict[str, float]]:
        if stage == 1:
            recon = self._relay_reconstruction(images, rng)
            loss = reconstruction_loss(images, recon)
            return loss, {"mse": float(loss.detach())}
        if stage == 2:
            with torch.no_grad():
                recon = self._relay_reconstruction(images, rng)
            loss = classification_loss(self.system.relay_classifier(recon), labels)
            return loss, {"ce": float(loss.detach())}
        if isinstance(self.system, MultiTaskRelaySystem):
            out = self.system.forward_train(images, labels, self.links, rng)
        else:
            out = self.system(images, self.links, rng)
        total, mse, ce = joint_loss(images, out.dest_recon, out.dest_logits,
                                    labels, self.cfg.lambda_cls)
        return total, {"total": float(total.detach()), "mse": float(mse.detach()),
                       "ce": float(ce.detach())}

    # -- the training loops -------------------------------------------------

    def train_stage(self, stage: int) -> list[EpochStats]:
        self._check_order(stage)
        cfg = self.cfg
        if not self.system.stage_modules(stage):
            log.info("scheme=%s stage=%d has no modules, skipping", self.scheme, stage)
            self.completed_stage = max(self.completed_stage, stage)
            return []
        params = self._set_trainable(stage)
        opt = torch.optim.Adam(params, lr=cfg.learning_rate)
        epochs = cfg.epochs_per_stage[stage - 1]
        stats: list[EpochStats] = []
        log.info("scheme=%s stage=%d  %-5s %-5s %-24s %-9s %-8s",
                 self.scheme, stage, "stage", "epoch", "train-loss", "psnr", "acc")
        for epoch in range(epochs):
            rng = channel_rng(cfg, stage, epoch)
            shuffle = np.random.default_rng([cfg.seed, stage, epoch])
            running: dict[str, float] = {}
            n_batches = 0
            for images, labels in self.train_data.batches(cfg.batch_size,
                                                          rng=shuffle):
                images = images.to(cfg.device)
                labels = labels.to(cfg.device)
                loss, parts = self._stage_loss(stage, images, labels, rng)
                if not torch.isfinite(loss):
                    raise TrainingDiverged(
                        f"scheme={self.scheme} stage={stage} epoch={epoch}: "
                        f"loss became {float(loss.detach())} after {n_batches} batches")
                opt.zero_grad()
                loss.backward()
                opt.step()
                for key, value in parts.items():
                    running[key] = running.get(key, 0.0) + value
                n_batches += 1
            losses = {k: v / n_batches for k, v in running.items()}
            entry = EpochStats(stage=stage, epoch=epoch, losses=losses)
            metrics = evaluate_system(self.system, self.eval_data,
                                      self.links, cfg)
            if stage == 2:
                # destination modules are untrained here; report the relay
                # classifier, which is what this stage fits
                entry.eval_accuracy = float(
                    metrics.get("relay_accuracy", metrics["accuracy"]))
            else:
                entry.eval_psnr = float(metrics["psnr_db"])
                entry.eval_accuracy = float(metrics["accuracy"])
            loss_text = " ".join(f"{k}={v:.5f}" for k, v in losses.items())
            log.info("scheme=%s stage=%d  %-5d %-5d %-24s %-9s %-8s",
                     self.scheme, stage, stage, epoch, loss_text,
                     "-" if entry.eval_psnr is None else f"{entry.eval_psnr:.2f}dB",
                     "-" if entry.eval_accuracy is None else f"{entry.eval_accuracy:.3f}")
            stats.append(entry)
        self.completed_stage = max(self.completed_stage, stage)
        self.history.extend(stats)
        if self.out_dir is not None:
            save_checkpoint(self.checkpoint_path(stage), self.system,
                            self.scheme, stage, cfg,
                            extra={"final_losses": stats[-1].losses},
                            optimizer_state=opt.state_dict())
        return stats

    def train_all(self) -> list[EpochStats]:
        for stage in STAGES:
            self.train_stage(stage)
        return self.history

    def evaluate(self) -> dict[str, float | bool]:
        return evaluate_system(self.system, self.eval_data, self.links, self.cfg)
