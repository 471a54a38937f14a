#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Depth-completion error metrics.

MAE and RMSE are reported in millimeters, iMAE and iRMSE on inverse depth in
1/km. Only pixels with valid ground truth no farther than ``max_depth`` count.
Errors are accumulated as sums so per-sample results merge into split totals
exactly as if all pixels had been pooled.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.stats import spearmanr

from core.errors import DimensionError, UndefinedMetricError

from depthmap.types import DepthMap, UncertaintyMap

logger = logging.getLogger(__name__)

DEFAULT_MAX_DEPTH = 80.0
MIN_PREDICTION = 1e-3
MM_PER_M = 1000.0


class MetricSet(BaseModel):
    """Errors of one prediction set against ground truth."""
    model_config = ConfigDict(frozen=True)

    mae_mm: float = Field(..., ge=0, description="Mean absolute error in mm")
    rmse_mm: float = Field(..., ge=0, description="Root mean squared error in mm")
    imae_inv_km: float = Field(..., ge=0, description="Mean absolute inverse-depth error in 1/km")
    irmse_inv_km: float = Field(..., ge=0, description="Root mean squared inverse-depth error in 1/km")
    n_pixels: int = Field(..., ge=1, description="Number of evaluated pixels")


@dataclass(frozen=True)
class MetricAccumulator:
    """Error sums over a pixel set; merging is associative and commutative."""
    abs_sum: float = 0.0
    sq_sum: float = 0.0
    inv_abs_sum: float = 0.0
    inv_sq_sum: float = 0.0
    count: int = 0

    @classmethod
    def from_arrays(cls, pred: np.ndarray, gt: np.ndarray, mask: np.ndarray) -> "MetricAccumulator":
        """Sums over ``mask``; depths in meters."""
        pred = np.asarray(pred, dtype=np.float64)[mask]
        gt = np.asarray(gt, dtype=np.float64)[mask]
        error_mm = (pred - gt) * MM_PER_M
        inv_error = MM_PER_M / np.maximum(pred, MIN_PREDICTION) - MM_PER_M / gt
        return cls(abs_sum=float(np.abs(error_mm).sum()), sq_sum=float((error_mm ** 2).sum()),
                   inv_abs_sum=float(np.abs(inv_error).sum()), inv_sq_sum=float((inv_error ** 2).sum()),
                   count=int(mask.sum()))

    def merge(self, other: "MetricAccumulator") -> "MetricAccumulator":
        return MetricAccumulator(self.abs_sum + other.abs_sum, self.sq_sum + other.sq_sum,
                                 self.inv_abs_sum + other.inv_abs_sum, self.inv_sq_sum + other.inv_sq_sum,
                                 self.count + other.count)

    __add__ = merge

    def finalize(self) -> MetricSet:
        """
        Raises:
            UndefinedMetricError: If no pixel was accumulated
        """
        if self.count == 0:
            error_msg = "Metrics over zero valid pixels are undefined"
            logger.error(error_msg)
            raise UndefinedMetricError(error_msg)
        n = self.count
        mae, imae = self.abs_sum / n, self.inv_abs_sum / n
        # rmse >= mae must survive rounding.
        rmse = max(math.sqrt(self.sq_sum / n), mae)
        irmse = max(math.sqrt(self.inv_sq_sum / n), imae)
        return MetricSet(mae_mm=mae, rmse_mm=rmse, imae_inv_km=imae, irmse_inv_km=irmse, n_pixels=n)


def evaluation_mask(gt: DepthMap, max_depth: float = DEFAULT_MAX_DEPTH) -> np.ndarray:
    return gt.valid & (gt.values > 0) & (gt.values <= max_depth)


def accumulate(d: DepthMap, gt: DepthMap, max_depth: float = DEFAULT_MAX_DEPTH) -> MetricAccumulator:
    """Error sums of one prediction; shapes must match."""
    if d.shape != gt.shape:
        error_msg = f"Prediction {d.shape} and ground truth {gt.shape} differ in shape"
        logger.error(error_msg)
        raise DimensionError(error_msg)
    return MetricAccumulator.from_arrays(d.values, gt.values, evaluation_mask(gt, max_depth))


def compute_metrics(d: DepthMap, gt: DepthMap, max_depth: float = DEFAULT_MAX_DEPTH) -> MetricSet:
    """
    MAE/RMSE (mm) and iMAE/iRMSE (1/km) of ``d`` over valid ground truth.

    Raises:
        DimensionError: If shapes differ
        UndefinedMetricError: If no ground-truth pixel is valid
    """
    return accumulate(d, gt, max_depth).finalize()


def spearman_uncertainty_error(sigma: UncertaintyMap, error: np.ndarray,
                               valid: Optional[np.ndarray] = None) -> float:
    """
    Rank correlation between log uncertainty and absolute depth error.

    Args:
        sigma: Predicted log uncertainty
        error: Absolute error |ẑ − d*| per pixel
        valid: Pixels to include (default: all)

    Raises:
        UndefinedMetricError: If fewer than two pixels remain or either input is constant
    """
    error = np.asarray(error)
    if error.shape != sigma.shape:
        raise DimensionError(f"Uncertainty {sigma.shape} and error {error.shape} differ in shape")
    mask = np.ones(error.shape, dtype=bool) if valid is None else np.asarray(valid, dtype=bool)
    x, y = sigma.values[mask], error[mask]
    if x.size < 2 or np.all(x == x[0]) or np.all(y == y[0]):
        raise UndefinedMetricError("Rank correlation needs at least two distinct values in each input")
    rho = float(spearmanr(x, y).correlation)
    logger.info(f"Spearman correlation between uncertainty and error: {rho:.4f} over {x.size} pixels")
    return rho
