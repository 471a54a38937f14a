#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Training objectives.

Every loss is a differentiable function of torch tensors shaped (H, W) or
(N, 1, H, W) (images (3, H, W) or (N, 3, H, W)). Raster types from
``depthmap`` are accepted too. Reductions are masked means over valid
ground-truth pixels; a reduction without valid pixels raises
UndefinedLossError.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import torch

from core.config import LossConfig
from core.errors import DimensionError, UndefinedLossError

from depthmap.types import UNCERTAINTY_CLAMP, DepthMap, Image, SparseDepthMap, UncertaintyMap

logger = logging.getLogger(__name__)

MapLike = Union[torch.Tensor, DepthMap, SparseDepthMap, UncertaintyMap, Image, np.ndarray]


def as_tensor(x: MapLike) -> torch.Tensor:
    """Tensor view of a raster; tensors pass through untouched."""
    if isinstance(x, torch.Tensor):
        return x
    if isinstance(x, (DepthMap, SparseDepthMap, UncertaintyMap, Image)):
        x = x.values
    return torch.as_tensor(np.asarray(x))


def valid_mask(gt: MapLike, valid: Optional[MapLike] = None) -> torch.Tensor:
    """Validity of ground truth: the explicit mask, the DepthMap mask, or gt > 0."""
    if valid is not None:
        return as_tensor(valid).bool()
    if isinstance(gt, (DepthMap, SparseDepthMap)):
        return torch.as_tensor(gt.valid)
    return as_tensor(gt) > 0


def _check_shapes(*tensors: torch.Tensor) -> None:
    shapes = {tuple(t.shape) for t in tensors}
    if len(shapes) != 1:
        raise DimensionError(f"Loss inputs disagree in shape: {sorted(shapes)}")


def masked_mean(values: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """
    Mean of ``values`` over ``mask``; masked-out entries never reach the gradient.

    Raises:
        UndefinedLossError: If the mask is empty
    """
    count = mask.sum()
    if int(count) == 0:
        error_msg = "Loss reduction over zero valid pixels"
        logger.error(error_msg)
        raise UndefinedLossError(error_msg)
    zeros = torch.zeros_like(values)
    return torch.where(mask, values, zeros).sum() / count


def loss_depth_l2(zhat: MapLike, gt: MapLike, valid: Optional[MapLike] = None) -> torch.Tensor:
    """Mean squared depth error over valid ground-truth pixels."""
    zhat_t, gt_t = as_tensor(zhat), as_tensor(gt)
    mask = valid_mask(gt, valid)
    _check_shapes(zhat_t, gt_t, mask)
    return masked_mean((zhat_t - gt_t) ** 2, mask)


def loss_uncertainty(zhat: MapLike, sigma: MapLike, gt: MapLike,
                     valid: Optional[MapLike] = None) -> torch.Tensor:
    """
    Gaussian negative log-likelihood with log standard deviation ``sigma``.

    Per pixel: ½((ẑ − d*) / e^σ)² + σ, with σ clamped to [-10, 10]; the minimum
    over σ sits at σ = ln|ẑ − d*|.
    """
    zhat_t, sigma_t, gt_t = as_tensor(zhat), as_tensor(sigma), as_tensor(gt)
    mask = valid_mask(gt, valid)
    _check_shapes(zhat_t, sigma_t, gt_t, mask)
    sigma_t = torch.clamp(sigma_t, -UNCERTAINTY_CLAMP, UNCERTAINTY_CLAMP)
    residual = zhat_t - gt_t
    nll = 0.5 * (residual * torch.exp(-sigma_t)) ** 2 + sigma_t
    return masked_mean(nll, mask)


def loss_supervised(d: MapLike, gt: MapLike, p: int = 2, valid: Optional[MapLike] = None) -> torch.Tensor:
    """Mean |d − d*| (p=1) or (d − d*)² (p=2) over valid ground-truth pixels."""
    if p not in (1, 2):
        raise ValueError(f"p must be 1 or 2, got {p}")
    d_t, gt_t = as_tensor(d), as_tensor(gt)
    mask = valid_mask(gt, valid)
    _check_shapes(d_t, gt_t, mask)
    error = d_t - gt_t
    return masked_mean(error.abs() if p == 1 else error ** 2, mask)


def forward_gradients(x: torch.Tensor):
    """Forward differences along width and height; the last column/row is zero."""
    grad_x = torch.zeros_like(x)
    grad_y = torch.zeros_like(x)
    grad_x[..., :, :-1] = x[..., :, 1:] - x[..., :, :-1]
    grad_y[..., :-1, :] = x[..., 1:, :] - x[..., :-1, :]
    return grad_x, grad_y


def loss_smoothness(d: MapLike, image: MapLike) -> torch.Tensor:
    """
    Edge-aware smoothness over the full image domain.

    (1/|Ω|) Σ e^{−|∂_X I|}|∂_X d| + e^{−|∂_Y I|}|∂_Y d|, where |∂I| is averaged
    over the three color channels.
    """
    d_t, image_t = as_tensor(d), as_tensor(image)
    if d_t.dim() == 2:
        d_t = d_t[None, None]
    if image_t.dim() == 3:
        image_t = image_t[None]
    if d_t.shape[-2:] != image_t.shape[-2:] or d_t.shape[0] != image_t.shape[0]:
        raise DimensionError(f"Depth {tuple(d_t.shape)} and image {tuple(image_t.shape)} disagree")
    if d_t.shape[-1] < 2 or d_t.shape[-2] < 2:
        raise DimensionError("Smoothness needs at least 2×2 pixels")

    image_t = image_t.to(d_t.dtype)
    image_dx, image_dy = forward_gradients(image_t)
    weight_x = torch.exp(-image_dx.abs().mean(dim=1, keepdim=True))
    weight_y = torch.exp(-image_dy.abs().mean(dim=1, keepdim=True))
    depth_dx, depth_dy = forward_gradients(d_t)
    return (weight_x * depth_dx.abs() + weight_y * depth_dy.abs()).mean()


@dataclass
class LossParts:
    """Terms of the downstream objective."""
    supervised: torch.Tensor
    smoothness: torch.Tensor


def loss_total(parts: LossParts, cfg: LossConfig) -> torch.Tensor:
    """w_sm · L_sm + w_sup · L_sup."""
    return cfg.w_sm * parts.smoothness + cfg.w_sup * parts.supervised


def url_objective(d: torch.Tensor, gt: torch.Tensor, image: torch.Tensor, cfg: LossConfig,
                  valid: Optional[torch.Tensor] = None):
    """
    Total downstream objective on a fused prediction.

    Returns:
        (total, parts)
    """
    parts = LossParts(supervised=loss_supervised(d, gt, cfg.p_norm, valid),
                      smoothness=loss_smoothness(d, image))
    return loss_total(parts, cfg), parts
