"""Stage-tagged checkpointing for the staged training procedure.

A checkpoint records the schema version, the scheme, the highest completed
training stage, the resolved experiment configuration, and the state dicts
of every module belonging to stages 1..stage.  Loading restores exactly
those modules and returns the metadata, so a stage-3 run can verify its
stage-1/2 prerequisites instead of silently training on random weights.
"""

from __future__ import annotations

import os
from dataclasses import asdict
from typing import Any

import torch
import torch.nn as nn

from .config import ExperimentConfig

SCHEMA_VERSION = 1


class CheckpointError(RuntimeError):
    """Raised for unreadable, mislabeled or structurally wrong checkpoints."""


def _modules_through_stage(system: nn.Module, stage: int) -> dict[str, nn.Module]:
    members: dict[str, nn.Module] = {}
    for k in range(1, stage + 1):
        members.update(system.stage_modules(k))
    return members


def save_checkpoint(path: str, system: nn.Module, scheme: str, stage: int,
                    cfg: ExperimentConfig,
                    extra: dict[str, Any] | None = None,
                    optimizer_state: dict[str, Any] | None = None) -> None:
    """Write the states of all modules trained up to and including stage."""
    if stage not in (1, 2, 3):
        raise ValueError(f"stage must be 1, 2 or 3, got {stage}")
    payload = {
        "schema_version": SCHEMA_VERSION,
        "scheme": scheme,
        "stage": stage,
        "config": asdict(cfg),
        "modules": {name: module.state_dict()
                    for name, module in _modules_through_stage(system, stage).items()},
        "optimizer_state": optimizer_state,
        "extra": dict(extra or {}),
    }
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    torch.save(payload, path)


def load_checkpoint(path: str, system: nn.Module,
                    expect_scheme: str | None = None,
                    min_stage: int | None = None) -> dict[str, Any]:
    """Restore module states from path into system; return the metadata.

    Raises CheckpointError when the file is unreadable, lacks the expected
    layout, was written for a different scheme, or records a completed
    stage lower than min_stage.
    """
    if not os.path.exists(path):
        raise CheckpointError(f"no checkpoint at {path}")
    try:
        payload = torch.load(path, map_location="cpu", weights_only=True)
    except Exception as exc:
        raise CheckpointError(f"unreadable checkpoint {path}: {exc}") from exc
    if not isinstance(payload, dict):
        raise CheckpointError(f"{path} does not contain a checkpoint dict")
    for key in ("schema_version", "scheme", "stage", "config", "modules"):
        if key not in payload:
            raise CheckpointError(f"{path} is missing checkpoint key {key!r}")
    if payload["schema_version"] != SCHEMA_VERSION:
        raise CheckpointError(
            f"{path} has schema version {payload['schema_version']}, "
            f"this code reads version {SCHEMA_VERSION}")
    if expect_scheme is not None and payload["scheme"] != expect_scheme:
        raise CheckpointError(
            f"{path} was written for scheme {payload['scheme']!r}, "
            f"expected {expect_scheme!r}")
    stage = payload["stage"]
    if min_stage is not None and stage < min_stage:
        raise CheckpointError(
            f"{path} completed stage {stage}, but stage {min_stage} "
            "states are required")
    available = _modules_through_stage(system, stage)
    for name, state in payload["modules"].items():
        if name not in available:
            raise CheckpointError(
                f"{path} stores module {name!r} unknown to this system")
        try:
            available[name].load_state_dict(state, strict=True)
        except Exception as exc:
            raise CheckpointError(
                f"{path}: state for module {name!r} does not fit "
                f"the current configuration: {exc}") from exc
    meta = {k: payload.get(k) for k in
            ("schema_version", "scheme", "stage", "config", "extra",
             "optimizer_state")}
    return meta
