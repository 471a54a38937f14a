#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
PNG storage of depth maps and images.

Depth follows the KITTI convention: 16-bit single-channel PNG holding
round(depth_m × 256), with 0 marking an invalid pixel. Images are 8-bit RGB.
"""

import logging
import os
from pathlib import Path
from typing import Union

import cv2
import numpy as np

from core.errors import FormatError

from .types import DepthMap, Image, SparseDepthMap

logger = logging.getLogger(__name__)

DEPTH_SCALE = 256.0
MAX_STORABLE_DEPTH = 65535 / DEPTH_SCALE

PathLike = Union[str, os.PathLike]


def _write(path: PathLike, array: np.ndarray) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if not cv2.imwrite(str(path), array):
        raise OSError(f"Could not write PNG: {path}")


def _read_raw(path: PathLike) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"PNG file not found: {path}")
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        error_msg = f"Could not decode PNG: {path}"
        logger.error(error_msg)
        raise FormatError(error_msg)
    return raw


def _encode_depth(values: np.ndarray, valid: np.ndarray, path: PathLike) -> None:
    values = np.where(valid, values, 0.0)
    if np.any(values > MAX_STORABLE_DEPTH):
        logger.warning(f"Depth above {MAX_STORABLE_DEPTH:.2f} m clipped while writing {path}")
    stored = np.clip(np.round(values.astype(np.float64) * DEPTH_SCALE), 0, 65535).astype(np.uint16)
    _write(path, stored)


def _decode_depth(path: PathLike) -> np.ndarray:
    raw = _read_raw(path)
    if raw.dtype != np.uint16 or raw.ndim != 2:
        error_msg = f"Depth PNG must be 16-bit single-channel, got {raw.dtype} with shape {raw.shape}: {path}"
        logger.error(error_msg)
        raise FormatError(error_msg)
    return raw.astype(np.float32) / DEPTH_SCALE


def write_depth_png16(depth: Union[DepthMap, SparseDepthMap], path: PathLike) -> None:
    """
    Writes a depth map as a 16-bit PNG (value = round(depth × 256), 0 = invalid).

    Args:
        depth: Dense or sparse depth map
        path: Destination file
    """
    _encode_depth(depth.values, depth.valid, path)


def read_depth_png16(path: PathLike) -> DepthMap:
    """
    Reads a 16-bit depth PNG into a DepthMap (zero pixels are invalid).

    Raises:
        FormatError: If the file is not a 16-bit single-channel PNG
    """
    return DepthMap.from_values(_decode_depth(path))


def read_sparse_png16(path: PathLike) -> SparseDepthMap:
    """Reads a 16-bit depth PNG into a SparseDepthMap."""
    return SparseDepthMap(_decode_depth(path))


def write_image_png(image: Image, path: PathLike) -> None:
    """Writes a [0, 1] RGB image as an 8-bit PNG."""
    hwc = np.round(image.values.transpose(1, 2, 0) * 255.0).astype(np.uint8)
    _write(path, cv2.cvtColor(hwc, cv2.COLOR_RGB2BGR))


def read_image_png(path: PathLike) -> Image:
    """
    Reads an 8-bit RGB PNG into an Image.

    Raises:
        FormatError: If the file is not an 8-bit 3-channel PNG
    """
    raw = _read_raw(path)
    if raw.dtype != np.uint8 or raw.ndim != 3 or raw.shape[2] != 3:
        error_msg = f"Image PNG must be 8-bit RGB, got {raw.dtype} with shape {raw.shape}: {path}"
        logger.error(error_msg)
        raise FormatError(error_msg)
    rgb = cv2.cvtColor(raw, cv2.COLOR_BGR2RGB)
    return Image(rgb.transpose(2, 0, 1).astype(np.float32) / 255.0)
