#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Pinhole projection of camera-frame point clouds into sparse depth maps.
"""

import logging

import numpy as np

from core.config import CameraIntrinsics, validate_model
from core.errors import InputError

from .types import SparseDepthMap

logger = logging.getLogger(__name__)


def project_points(points, intrinsics: CameraIntrinsics) -> SparseDepthMap:
    """
    Projects camera-frame points (X right, Y down, Z forward; meters) onto the image plane.

    Points with Z <= 0 or landing outside the image are discarded. When several
    points fall on one pixel the nearest (smallest Z) wins.

    Args:
        points: Array-like of shape (N, 3)
        intrinsics: Camera intrinsics

    Returns:
        SparseDepthMap of size intrinsics.height × intrinsics.width

    Raises:
        ConfigurationError: If the intrinsics are invalid
        InputError: If points are not an (N, 3) finite array
    """
    K = validate_model(CameraIntrinsics, intrinsics)
    try:
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    except ValueError as e:
        raise InputError(f"Points must have shape (N, 3): {e}") from e
    if not np.all(np.isfinite(pts)):
        raise InputError("Point cloud contains non-finite coordinates")

    pts = pts[pts[:, 2] > 0]
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    u = np.round(K.fx * x / z + K.cx).astype(np.int64)
    v = np.round(K.fy * y / z + K.cy).astype(np.int64)

    inside = (u >= 0) & (u < K.width) & (v >= 0) & (v < K.height)
    u, v, z = u[inside], v[inside], z[inside]

    zbuffer = np.full((K.height, K.width), np.inf)
    np.minimum.at(zbuffer, (v, u), z)
    depth = np.where(np.isfinite(zbuffer), zbuffer, 0.0).astype(np.float32)

    logger.debug(f"Projected {len(z)} of {len(pts)} forward points into {K.width}x{K.height}")
    return SparseDepthMap(depth)
