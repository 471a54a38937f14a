#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Self-describing checkpoint container shared by SpaDe and backbone checkpoints.

A checkpoint is a torch-serialized dictionary holding named parameter tensors
plus metadata (kind, format version, architecture, training progress, config
digest). Only plain containers and tensors are stored so files load with
``weights_only=True``.
"""

import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

import torch

from .errors import CheckpointError, CheckpointVersionError, ConfigurationError

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT_VERSION = 1

PathLike = Union[str, os.PathLike]


def save_container(path: PathLike, kind: str, state_dict: Dict[str, torch.Tensor],
                   metadata: Dict[str, Any], optimizer: Optional[Dict[str, Any]] = None) -> Path:
    """
    Writes a checkpoint container.

    Args:
        path: Destination file
        kind: Checkpoint kind ("spade" or "backbone")
        state_dict: Named parameter tensors
        metadata: JSON-like metadata
        optimizer: Optional optimizer state

    Returns:
        The path written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "kind": kind,
        "state_dict": {name: tensor.detach().cpu().clone() for name, tensor in state_dict.items()},
        "metadata": metadata,
        "optimizer": optimizer,
    }
    # Atomic replace: readers never see a partially written file.
    tmp_path = path.with_name(path.name + ".tmp")
    torch.save(payload, tmp_path)
    os.replace(tmp_path, path)
    logger.info(f"Saved {kind} checkpoint to {path}")
    return path


def load_container(path: PathLike, kind: str) -> Dict[str, Any]:
    """
    Reads and checks a checkpoint container.

    Args:
        path: Checkpoint file
        kind: Expected checkpoint kind

    Returns:
        The payload dictionary

    Raises:
        ConfigurationError: If the file does not exist
        CheckpointError: If the file is unreadable, truncated or of another kind
        CheckpointVersionError: If the format version differs
    """
    path = Path(path)
    if not path.exists():
        error_msg = f"Checkpoint not found: {path}"
        logger.error(error_msg)
        raise ConfigurationError(error_msg)
    try:
        payload = torch.load(path, map_location="cpu", weights_only=True)
    except Exception as e:
        error_msg = f"Cannot read checkpoint {path}: {e}"
        logger.error(error_msg)
        raise CheckpointError(error_msg) from e

    if not isinstance(payload, dict) or "format_version" not in payload:
        raise CheckpointError(f"Not a spade_url checkpoint: {path}")
    if payload["format_version"] != CHECKPOINT_FORMAT_VERSION:
        error_msg = (f"Checkpoint {path} has format version {payload['format_version']}, "
                     f"expected {CHECKPOINT_FORMAT_VERSION}")
        logger.error(error_msg)
        raise CheckpointVersionError(error_msg)
    if payload.get("kind") != kind:
        raise CheckpointError(f"Checkpoint {path} holds a {payload.get('kind')} model, expected {kind}")

    logger.info(f"Loaded {kind} checkpoint from {path}")
    return payload
