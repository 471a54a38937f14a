#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
LiDAR imitation: samples a dense depth map along the rings of a spinning sensor.
"""

import logging
from typing import Optional

import numpy as np

from core.config import CameraIntrinsics, LidarPattern

from depthmap.types import DepthMap, SparseDepthMap

logger = logging.getLogger(__name__)


def ring_pixels(pattern: LidarPattern, intrinsics: CameraIntrinsics) -> np.ndarray:
    """
    Rasterizes the beam rings through the intrinsics.

    Beams are evenly spaced in elevation over ``vertical_fov`` (degrees, positive
    up); each beam steps in azimuth by ``azimuth_step`` across the horizontal
    field of view of the camera.

    Returns:
        Unique (row, col) pixel coordinates hit by the pattern, shape (N, 2), row-major order
    """
    K = intrinsics
    lo, hi = pattern.vertical_fov
    elevations = np.deg2rad(np.linspace(lo, hi, pattern.num_beams))
    half_fov = np.arctan(max(K.cx, K.width - 1 - K.cx) / K.fx)
    azimuths = np.arange(-half_fov, half_fov + 1e-12, np.deg2rad(pattern.azimuth_step))

    el, az = np.meshgrid(elevations, azimuths, indexing="ij")
    x = np.cos(el) * np.sin(az)
    y = -np.sin(el)
    z = np.cos(el) * np.cos(az)
    u = np.round(K.fx * x / z + K.cx).astype(np.int64).ravel()
    v = np.round(K.fy * y / z + K.cy).astype(np.int64).ravel()
    inside = (u >= 0) & (u < K.width) & (v >= 0) & (v < K.height)
    pixels = np.stack([v[inside], u[inside]], axis=1)
    return np.unique(pixels, axis=0)


def sparsify(gt: DepthMap, pattern: LidarPattern, seed: int,
             intrinsics: Optional[CameraIntrinsics] = None) -> SparseDepthMap:
    """
    Imitates a LiDAR sweep over a dense ground-truth depth map.

    Sampled pixels carry the ground-truth value exactly; each sample is then
    dropped independently with probability ``dropout_prob``.

    Args:
        gt: Dense ground truth
        pattern: Beam pattern
        seed: Seed of the dropout draw
        intrinsics: Camera intrinsics; defaults to a centered camera of gt's size

    Returns:
        SparseDepthMap (empty, with a warning, if nothing survives)
    """
    height, width = gt.shape
    if intrinsics is None:
        intrinsics = CameraIntrinsics(fx=CameraIntrinsics().fx, fy=CameraIntrinsics().fy,
                                      cx=width / 2, cy=height / 2, width=width, height=height)
    rng = np.random.default_rng(seed)
    pixels = ring_pixels(pattern, intrinsics)
    keep = rng.random(len(pixels)) >= pattern.dropout_prob
    rows, cols = pixels[keep, 0], pixels[keep, 1]
    on_valid = gt.valid[rows, cols]
    rows, cols = rows[on_valid], cols[on_valid]

    sparse = np.zeros((height, width), dtype=gt.values.dtype)
    sparse[rows, cols] = gt.values[rows, cols]
    if len(rows) == 0:
        logger.warning("LiDAR pattern produced no samples; returning an empty sparse map")
    else:
        logger.debug(f"Sparsified {len(rows)} pixels ({len(rows) / (height * width):.2%})")
    return SparseDepthMap(sparse)
