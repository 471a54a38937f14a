#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Downstream depth completion around a frozen SpaDe.

Three regimes share one module:

* ``sparse``: the backbone reads raw sparse depth, d = d̂.
* ``augment``: the backbone reads [z, ẑ, σ̂], d = d̂.
* ``url``: the backbone reads [z, ẑ, σ̂] and d = λ(σ̂)·ẑ + (1 − λ(σ̂))·d̂.
"""

import copy
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import torch
import torch.nn as nn

from core.config import FusionConfig
from core.errors import ConfigurationError

from depthmap.types import DepthMap, Image, SparseDepthMap
from fusion.merge import fuse_tensors, lambda_tensor, pack_tensors
from spade.network import SpadeNet

from .interface import BackboneInterface

logger = logging.getLogger(__name__)

MODES = ("sparse", "augment", "url")


def freeze(module: nn.Module) -> nn.Module:
    """Disables gradients and switches to inference mode."""
    module.eval()
    for parameter in module.parameters():
        parameter.requires_grad_(False)
    return module


class UrlModel(nn.Module):
    """
    Backbone plus, outside ``sparse`` mode, a frozen SpaDe and the fusion rule.

    The model holds a frozen copy of ``spade``; the caller's module keeps its
    ``requires_grad`` flags and training mode.
    """

    def __init__(self, backbone: BackboneInterface, spade: Optional[SpadeNet] = None,
                 mode: str = "url", fusion: FusionConfig = FusionConfig()):
        super().__init__()
        if mode not in MODES:
            raise ConfigurationError(f"Unknown training mode: {mode}")
        expected_channels = 1 if mode == "sparse" else 3
        if backbone.depth_channels != expected_channels:
            raise ConfigurationError(f"Mode {mode} needs a backbone with {expected_channels} depth channels, "
                                     f"{backbone.arch.name} has {backbone.depth_channels}")
        if mode != "sparse" and spade is None:
            raise ConfigurationError(f"Mode {mode} needs a SpaDe checkpoint")
        self.backbone = backbone
        self.spade = freeze(copy.deepcopy(spade)) if spade is not None and mode != "sparse" else None
        self.mode = mode
        self.fusion = fusion

    def train(self, mode: bool = True) -> "UrlModel":
        super().train(mode)
        if self.spade is not None:
            self.spade.eval()
        return self

    def forward(self, image: torch.Tensor, sparse: torch.Tensor) -> Tuple[torch.Tensor, Dict[str, torch.Tensor]]:
        """
        Args:
            image: (N, 3, H, W)
            sparse: (N, 1, H, W) sparse depth

        Returns:
            (d, diagnostics); diagnostics hold ``dhat`` and, outside ``sparse`` mode,
            ``zhat``, ``sigma`` and ``lam``
        """
        if self.mode == "sparse":
            dhat = self.backbone(image, sparse)
            return dhat, {"dhat": dhat}

        with torch.no_grad():
            zhat, sigma = self.spade(sparse)
        dhat = self.backbone(image, pack_tensors(sparse, zhat, sigma))
        lam = lambda_tensor(sigma, self.fusion.alpha, self.fusion.beta)
        diagnostics = {"zhat": zhat, "sigma": sigma, "lam": lam, "dhat": dhat}
        if self.mode == "augment":
            return dhat, diagnostics
        return fuse_tensors(zhat, dhat, lam), diagnostics


@dataclass
class UrlDiagnostics:
    """Intermediate maps of one URL forward pass, H×W each."""
    zhat: np.ndarray
    sigma: np.ndarray
    lam: np.ndarray
    dhat: np.ndarray


@torch.no_grad()
def url_forward(image: Image, z: SparseDepthMap, spade: SpadeNet, backbone: BackboneInterface,
                cfg: FusionConfig = FusionConfig()) -> Tuple[DepthMap, UrlDiagnostics]:
    """
    Fused depth of one frame with SpaDe frozen.

    Returns:
        (d, diagnostics) with d = λ(σ̂)·ẑ + (1 − λ(σ̂))·d̂
    """
    model = UrlModel(backbone, spade, mode="url", fusion=cfg)
    model.eval()
    param = next(backbone.parameters())
    image_t = torch.from_numpy(np.ascontiguousarray(image.values))[None].to(param.dtype)
    sparse_t = torch.from_numpy(np.ascontiguousarray(z.values))[None, None].to(param.dtype)
    d, maps = model(image_t, sparse_t)
    diagnostics = UrlDiagnostics(**{key: value[0, 0].cpu().numpy() for key, value in maps.items()})
    return DepthMap.dense(d[0, 0].cpu().numpy()), diagnostics


def stratified_refinement(diagnostics: Union[UrlDiagnostics, Sequence[UrlDiagnostics]],
                          quartiles: int = 4) -> List[float]:
    """
    Mean |d̂ − ẑ| within each σ̂ quantile bin, from lowest to highest uncertainty.

    Args:
        diagnostics: One or more URL diagnostics; pixels are pooled
        quartiles: Number of equally populated σ̂ bins

    Returns:
        One mean per bin
    """
    if isinstance(diagnostics, UrlDiagnostics):
        diagnostics = [diagnostics]
    sigma = np.concatenate([diag.sigma.ravel() for diag in diagnostics]).astype(np.float64)
    refinement = np.concatenate([np.abs(diag.dhat - diag.zhat).ravel() for diag in diagnostics])
    edges = np.quantile(sigma, np.linspace(0.0, 1.0, quartiles + 1)[1:-1])
    bins = np.digitize(sigma, edges, right=True)
    means = []
    for index in range(quartiles):
        in_bin = bins == index
        means.append(float(refinement[in_bin].mean()) if in_bin.any() else float("nan"))
    logger.info(f"Refinement by uncertainty bin: {[round(m, 4) for m in means]}")
    return means
