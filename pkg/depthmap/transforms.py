#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Geometric and photometric transforms on rasters and samples.

bottom_crop implements the evaluation crop (bottom rows, horizontally
centered). augment implements the training augmentations: random resize and
crop, horizontal flip and color jitter. Geometric transforms act identically
on the image, the sparse depth and the ground truth.
"""

import logging
from functools import singledispatch
from typing import Tuple

import cv2
import numpy as np

from core.config import AugmentConfig
from core.errors import DimensionError

from .types import DepthMap, Image, Sample, SparseDepthMap, UncertaintyMap

logger = logging.getLogger(__name__)


def _crop_window(height: int, width: int, crop_h: int, crop_w: int) -> Tuple[slice, slice]:
    if crop_h < 1 or crop_w < 1 or crop_h > height or crop_w > width:
        raise DimensionError(f"Cannot crop {crop_h}x{crop_w} out of {height}x{width}")
    left = (width - crop_w) // 2
    return slice(height - crop_h, height), slice(left, left + crop_w)


@singledispatch
def bottom_crop(raster, crop_h: int, crop_w: int):
    """
    Keeps the bottom ``crop_h`` rows and the horizontally centered ``crop_w`` columns.

    Works on numpy arrays (last two axes), every raster type and whole samples.

    Raises:
        DimensionError: If the crop is larger than the raster
    """
    array = np.asarray(raster)
    rows, cols = _crop_window(array.shape[-2], array.shape[-1], crop_h, crop_w)
    return array[..., rows, cols].copy()


@bottom_crop.register
def _(raster: DepthMap, crop_h: int, crop_w: int) -> DepthMap:
    return DepthMap(values=bottom_crop(raster.values, crop_h, crop_w),
                    valid=bottom_crop(raster.valid, crop_h, crop_w))


@bottom_crop.register
def _(raster: SparseDepthMap, crop_h: int, crop_w: int) -> SparseDepthMap:
    return SparseDepthMap(bottom_crop(raster.values, crop_h, crop_w))


@bottom_crop.register
def _(raster: UncertaintyMap, crop_h: int, crop_w: int) -> UncertaintyMap:
    return UncertaintyMap(bottom_crop(raster.values, crop_h, crop_w))


@bottom_crop.register
def _(raster: Image, crop_h: int, crop_w: int) -> Image:
    return Image(bottom_crop(raster.values, crop_h, crop_w))


@bottom_crop.register
def _(sample: Sample, crop_h: int, crop_w: int) -> Sample:
    return Sample(image=bottom_crop(sample.image, crop_h, crop_w),
                  sparse=bottom_crop(sample.sparse, crop_h, crop_w),
                  gt=bottom_crop(sample.gt, crop_h, crop_w),
                  tag=sample.tag, sample_id=sample.sample_id)


def _resize_nearest(array: np.ndarray, size: Tuple[int, int]) -> np.ndarray:
    height, width = size
    return cv2.resize(array, (width, height), interpolation=cv2.INTER_NEAREST)


def _jitter(image: np.ndarray, cfg: AugmentConfig, rng: np.random.Generator) -> np.ndarray:
    """Color jitter on a 3×H×W image: brightness, contrast, saturation."""
    if cfg.brightness == 0 and cfg.contrast == 0 and cfg.saturation == 0:
        return image
    out = image.astype(np.float32)
    if cfg.brightness > 0:
        out = out * rng.uniform(1 - cfg.brightness, 1 + cfg.brightness)
    if cfg.contrast > 0:
        gray_mean = out.mean(axis=0).mean()
        out = (out - gray_mean) * rng.uniform(1 - cfg.contrast, 1 + cfg.contrast) + gray_mean
    if cfg.saturation > 0:
        gray = out.mean(axis=0, keepdims=True)
        out = gray + (out - gray) * rng.uniform(1 - cfg.saturation, 1 + cfg.saturation)
    return np.clip(out, 0.0, 1.0)


def augment(sample: Sample, cfg: AugmentConfig, rng_seed: int) -> Sample:
    """
    Applies random resize, random crop, horizontal flip and color jitter.

    Resizing by a factor s divides depth values by s so the rescaled image keeps
    pinhole consistency. Depth rasters use nearest-neighbor interpolation, the
    image bilinear.

    Args:
        sample: Input sample
        cfg: Augmentation configuration
        rng_seed: Seed; equal seeds give equal outputs

    Returns:
        Augmented sample

    Raises:
        DimensionError: If the crop exceeds the resized raster
    """
    rng = np.random.default_rng(rng_seed)
    image = sample.image.values
    sparse = sample.sparse.values
    gt_values, gt_valid = sample.gt.values, sample.gt.valid

    lo, hi = cfg.resize_range
    if (lo, hi) != (1.0, 1.0):
        scale = float(rng.uniform(lo, hi))
        height, width = sample.shape
        size = (max(1, int(round(height * scale))), max(1, int(round(width * scale))))
        hwc = cv2.resize(np.ascontiguousarray(image.transpose(1, 2, 0)), (size[1], size[0]),
                         interpolation=cv2.INTER_LINEAR)
        image = np.clip(hwc.transpose(2, 0, 1), 0.0, 1.0)
        sparse = _resize_nearest(sparse, size) / scale
        gt_values = _resize_nearest(gt_values, size) / scale
        gt_valid = _resize_nearest(gt_valid.astype(np.uint8), size).astype(bool)

    if cfg.crop is not None:
        crop_h, crop_w = cfg.crop
        height, width = gt_values.shape
        if crop_h > height or crop_w > width:
            raise DimensionError(f"Augmentation crop {crop_h}x{crop_w} exceeds {height}x{width}")
        top = int(rng.integers(0, height - crop_h + 1))
        left = int(rng.integers(0, width - crop_w + 1))
        rows, cols = slice(top, top + crop_h), slice(left, left + crop_w)
        image = image[:, rows, cols]
        sparse = sparse[rows, cols]
        gt_values, gt_valid = gt_values[rows, cols], gt_valid[rows, cols]

    if rng.random() < cfg.flip_prob:
        image = image[:, :, ::-1]
        sparse = sparse[:, ::-1]
        gt_values, gt_valid = gt_values[:, ::-1], gt_valid[:, ::-1]

    image = _jitter(image, cfg, rng)

    return Sample(image=Image(np.ascontiguousarray(image)),
                  sparse=SparseDepthMap(np.ascontiguousarray(sparse)),
                  gt=DepthMap(values=np.ascontiguousarray(gt_values), valid=np.ascontiguousarray(gt_valid)),
                  tag=sample.tag, sample_id=sample.sample_id)
