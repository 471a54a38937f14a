#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Backbone checkpoints: registry name, architecture, regime and fusion settings.
"""

import logging
from pathlib import Path
from typing import Optional

from core.checkpoint import PathLike, load_container, save_container
from core.config import BackboneArch, FusionConfig, validate_model
from core.errors import CheckpointError

from .factory import BackboneFactory
from .trainer import BackboneState

logger = logging.getLogger(__name__)

KIND = "backbone"


def save_backbone(state: BackboneState, path: PathLike, config_digest: Optional[str] = None) -> Path:
    backbone = state.backbone
    metadata = {
        "name": backbone.arch.name,
        "arch": backbone.arch.model_dump(mode="json"),
        "loss_p_norm": backbone.loss_p_norm,
        "mode": state.mode,
        "fusion": state.fusion.model_dump(),
        "epoch": state.epoch,
        "seed": state.seed,
        "config_digest": config_digest,
    }
    return save_container(path, KIND, backbone.state_dict(), metadata, state.optimizer_state)


def load_backbone(path: PathLike) -> BackboneState:
    """
    Rebuilds a backbone through the registry and restores its parameters.

    Raises:
        ConfigurationError: If the file is missing or the backbone name is not registered
        CheckpointError: If the file is unreadable or inconsistent with its architecture
        CheckpointVersionError: If the format version differs
    """
    payload = load_container(path, KIND)
    metadata = payload["metadata"]
    try:
        arch = validate_model(BackboneArch, metadata["arch"])
        fusion = validate_model(FusionConfig, metadata["fusion"])
        backbone = BackboneFactory().create_backbone(arch, int(metadata.get("loss_p_norm", 2)))
        backbone.load_state_dict(payload["state_dict"], strict=True)
    except (KeyError, RuntimeError) as e:
        error_msg = f"Backbone checkpoint {path} is inconsistent: {e}"
        logger.error(error_msg)
        raise CheckpointError(error_msg) from e

    return BackboneState(backbone=backbone, mode=metadata.get("mode", "url"), fusion=fusion,
                         epoch=int(metadata.get("epoch", 0)), seed=int(metadata.get("seed", 0)),
                         optimizer_state=payload.get("optimizer"))
