#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
SpaDe checkpoints on top of the shared container format.
"""

import logging
from pathlib import Path
from typing import Optional

from core.checkpoint import PathLike, load_container, save_container
from core.config import SpadeArch, validate_model
from core.errors import CheckpointError

from .network import SpadeNet
from .trainer import TrainState

logger = logging.getLogger(__name__)

KIND = "spade"


def save_checkpoint(state: TrainState, path: PathLike, config_digest: Optional[str] = None) -> Path:
    """
    Writes SpaDe parameters, their partition labels and training progress.

    Args:
        state: Training state to persist
        path: Destination file
        config_digest: Digest of the run configuration that produced the state

    Returns:
        The path written
    """
    model = state.model
    metadata = {
        "arch": model.arch.model_dump(mode="json"),
        "partition": model.partition(),
        "stage": state.stage,
        "epoch": state.epoch,
        "seed": state.seed,
        "config_digest": config_digest,
    }
    return save_container(path, KIND, model.state_dict(), metadata, state.optimizer_state)


def load_checkpoint(path: PathLike) -> TrainState:
    """
    Reads a SpaDe checkpoint.

    Raises:
        ConfigurationError: If the file does not exist
        CheckpointError: If the file is unreadable or its parameters do not match the recorded architecture
        CheckpointVersionError: If the format version differs
    """
    payload = load_container(path, KIND)
    metadata = payload["metadata"]
    try:
        arch = validate_model(SpadeArch, metadata["arch"])
        model = SpadeNet(arch)
        model.load_state_dict(payload["state_dict"], strict=True)
    except (KeyError, RuntimeError) as e:
        error_msg = f"SpaDe checkpoint {path} is inconsistent: {e}"
        logger.error(error_msg)
        raise CheckpointError(error_msg) from e

    if metadata.get("partition") != model.partition():
        raise CheckpointError(f"SpaDe checkpoint {path} has mismatching partition labels")

    state = TrainState(model=model, stage=int(metadata.get("stage", 0)), epoch=int(metadata.get("epoch", 0)),
                       seed=int(metadata.get("seed", 0)), optimizer_state=payload.get("optimizer"))
    logger.info(f"SpaDe checkpoint at stage {state.stage}, epoch {state.epoch}")
    return state
