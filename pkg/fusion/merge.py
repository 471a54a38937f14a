#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Fusion of SpaDe predictions with sparse depth and downstream predictions.

Two mechanisms are provided:

* Plug-and-play merge: unmeasured pixels whose log uncertainty lies strictly
  below ``tau`` take the SpaDe depth; the result keeps sparse-map semantics
  (zero means missing) so any pretrained backbone can consume it.
* Uncertainty-weighted residual fusion: d = λ(σ̂)·ẑ + (1 − λ(σ̂))·d̂ with
  λ(σ̂) = 1 / (1 + exp(α(σ̂ − β))).

Each operation has a tensor form used inside training graphs and a raster
form over ``depthmap`` types built on top of it.
"""

import logging
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
import torch

from core.config import FusionConfig
from core.errors import DimensionError, InputError

from depthmap.types import UNCERTAINTY_CLAMP, DepthMap, SparseDepthMap, UncertaintyMap

logger = logging.getLogger(__name__)


def _check_same_shape(*shapes) -> None:
    distinct = {tuple(shape) for shape in shapes}
    if len(distinct) != 1:
        error_msg = f"Fusion inputs disagree in shape: {sorted(distinct)}"
        logger.error(error_msg)
        raise DimensionError(error_msg)


# Tensor forms

def merge_tensors(z: torch.Tensor, zhat: torch.Tensor, sigma: torch.Tensor, tau: float) -> torch.Tensor:
    """Measured z where z > 0, else ẑ where σ̂ < τ, else 0; in the common dtype of z and ẑ."""
    _check_same_shape(z.shape, zhat.shape, sigma.shape)
    dtype = torch.promote_types(z.dtype, zhat.dtype)
    z = z.to(dtype)
    zhat = zhat.to(dtype)
    substituted = torch.where(sigma < tau, zhat, torch.zeros_like(zhat))
    return torch.where(z > 0, z, substituted)


def pack_tensors(z: torch.Tensor, zhat: torch.Tensor, sigma: torch.Tensor) -> torch.Tensor:
    """Concatenates [z, ẑ, σ̂] along the channel axis of (N, 1, H, W) tensors."""
    _check_same_shape(z.shape, zhat.shape, sigma.shape)
    return torch.cat([z, zhat, sigma], dim=-3)


def lambda_tensor(sigma: torch.Tensor, alpha: float, beta: float) -> torch.Tensor:
    """1 / (1 + exp(α(σ̂ − β))); strictly decreasing in σ̂."""
    return torch.sigmoid(-alpha * (sigma - beta))


def fuse_tensors(zhat: torch.Tensor, dhat: torch.Tensor, lam: torch.Tensor) -> torch.Tensor:
    """λ·ẑ + (1 − λ)·d̂; the gradient reaching d̂ is (1 − λ) times the gradient of d."""
    _check_same_shape(zhat.shape, dhat.shape, lam.shape)
    return lam * zhat + (1 - lam) * dhat


# Raster forms

@dataclass(frozen=True)
class PackedInput:
    """Three channels [z, ẑ, σ̂], each H×W."""
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 3 or values.shape[0] != 3:
            raise DimensionError(f"PackedInput must have shape 3×H×W, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InputError("PackedInput contains non-finite values")
        if np.any(values[0] < 0):
            raise InputError("Sparse channel must be non-negative")
        if np.any(values[1] <= 0):
            raise InputError("SpaDe depth channel must be strictly positive")
        if np.any(np.abs(values[2]) > UNCERTAINTY_CLAMP):
            raise InputError(f"Uncertainty channel must lie in [-{UNCERTAINTY_CLAMP}, {UNCERTAINTY_CLAMP}]")
        object.__setattr__(self, "values", values)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape[1:]


def _tensor(values: np.ndarray) -> torch.Tensor:
    return torch.from_numpy(np.ascontiguousarray(values))


def merge_plug_and_play(z: SparseDepthMap, zhat: DepthMap, sigma: UncertaintyMap,
                        cfg: FusionConfig = FusionConfig()) -> SparseDepthMap:
    """
    Densifies a sparse map with confident SpaDe predictions.

    Args:
        z: Measured sparse depth
        zhat: SpaDe depth
        sigma: SpaDe log uncertainty
        cfg: Fusion configuration (``tau`` is used; ``-inf`` disables substitution)

    Returns:
        Merged sparse map; measured pixels are copied exactly

    Raises:
        DimensionError: If shapes differ
    """
    _check_same_shape(z.shape, zhat.shape, sigma.shape)
    merged = merge_tensors(_tensor(z.values), _tensor(zhat.values), _tensor(sigma.values), cfg.tau)
    result = SparseDepthMap(merged.numpy())
    logger.debug(f"Plug-and-play merge: density {z.density:.4f} -> {result.density:.4f} (tau={cfg.tau})")
    return result


def pack_url_input(z: SparseDepthMap, zhat: DepthMap, sigma: UncertaintyMap) -> PackedInput:
    """Stacks [z, ẑ, σ̂] without transforming any value."""
    _check_same_shape(z.shape, zhat.shape, sigma.shape)
    dtype = np.result_type(z.values, zhat.values, sigma.values)
    return PackedInput(np.stack([z.values, zhat.values, sigma.values]).astype(dtype, copy=False))


def unpack(packed: PackedInput) -> Tuple[SparseDepthMap, DepthMap, UncertaintyMap]:
    """Inverse of ``pack_url_input``."""
    z, zhat, sigma = packed.values
    return SparseDepthMap(z), DepthMap.dense(zhat), UncertaintyMap(sigma)


def lambda_weight(sigma: Union[UncertaintyMap, torch.Tensor],
                  cfg: FusionConfig = FusionConfig()) -> Union[np.ndarray, torch.Tensor]:
    """
    Reliability weight of the SpaDe depth, in (0, 1).

    Tensors are mapped in their own dtype; rasters are evaluated in float64.
    """
    if isinstance(sigma, torch.Tensor):
        return lambda_tensor(sigma, cfg.alpha, cfg.beta)
    values = _tensor(sigma.values.astype(np.float64))
    return lambda_tensor(values, cfg.alpha, cfg.beta).numpy()


def fuse_residual(zhat: DepthMap, dhat: DepthMap, lam: np.ndarray) -> DepthMap:
    """
    Convex per-pixel combination of SpaDe depth and backbone depth.

    Args:
        zhat: SpaDe depth
        dhat: Backbone depth
        lam: Weight of ``zhat`` per pixel

    Returns:
        Fused depth, valid everywhere

    Raises:
        DimensionError: If shapes differ
        InputError: If a weight is non-finite or outside [0, 1]
    """
    lam = np.asarray(lam)
    _check_same_shape(zhat.shape, dhat.shape, lam.shape)
    if not np.all(np.isfinite(lam)) or lam.min() < 0 or lam.max() > 1:
        error_msg = "Fusion weights must lie in [0, 1]"
        logger.error(error_msg)
        raise InputError(error_msg)
    dtype = np.result_type(zhat.values, dhat.values, lam)
    fused = fuse_tensors(_tensor(zhat.values.astype(dtype, copy=False)),
                         _tensor(dhat.values.astype(dtype, copy=False)),
                         _tensor(lam.astype(dtype, copy=False)))
    return DepthMap.dense(fused.numpy())
