#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
SpaDe: sparse-to-dense encoder-decoder predicting depth and log uncertainty.

The network reads two channels, sparse depth normalized by ``max_depth`` and
its validity mask, and shares one encoder between a depth decoder and an
uncertainty decoder. Parameters are partitioned into ``encoder``,
``depth_decoder`` and ``uncertainty_decoder``.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from core.config import SpadeArch
from core.errors import InputError

from depthmap.types import UNCERTAINTY_CLAMP, DepthMap, SparseDepthMap, UncertaintyMap

logger = logging.getLogger(__name__)

PARTITIONS = ("encoder", "depth_decoder", "uncertainty_decoder")


class ConvBlock(nn.Module):
    """Two 3×3 convolutions with ELU; the first may downsample."""

    def __init__(self, cin: int, cout: int, stride: int = 1):
        super().__init__()
        self.net = nn.Sequential(
            nn.Conv2d(cin, cout, 3, stride=stride, padding=1),
            nn.ELU(inplace=False),
            nn.Conv2d(cout, cout, 3, padding=1),
            nn.ELU(inplace=False),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.net(x)


def level_channels(base: int, levels: int) -> List[int]:
    """Channel width of each encoder level, capped at 4× base."""
    return [base * min(2 ** i, 4) for i in range(levels + 1)]


class Encoder(nn.Module):
    """Full-resolution stem followed by ``levels`` stride-2 blocks."""

    def __init__(self, in_channels: int, base: int, levels: int):
        super().__init__()
        channels = level_channels(base, levels)
        self.stem = ConvBlock(in_channels, channels[0])
        self.down = nn.ModuleList(
            ConvBlock(channels[i], channels[i + 1], stride=2) for i in range(levels)
        )

    def forward(self, x: torch.Tensor) -> List[torch.Tensor]:
        features = [self.stem(x)]
        for block in self.down:
            features.append(block(features[-1]))
        return features


class Decoder(nn.Module):
    """Bilinear upsampling with skip connections down to a single output channel."""

    def __init__(self, base: int, levels: int):
        super().__init__()
        channels = level_channels(base, levels)
        self.up = nn.ModuleList(
            ConvBlock(channels[i + 1] + channels[i], channels[i]) for i in reversed(range(levels))
        )
        self.head = nn.Conv2d(channels[0], 1, 3, padding=1)

    def forward(self, features: List[torch.Tensor]) -> torch.Tensor:
        x = features[-1]
        for block, skip in zip(self.up, reversed(features[:-1])):
            x = F.interpolate(x, size=skip.shape[-2:], mode="bilinear", align_corners=False)
            x = block(torch.cat([x, skip], dim=1))
        return self.head(x)


def pad_to_multiple(x: torch.Tensor, multiple: int) -> Tuple[torch.Tensor, Tuple[int, int]]:
    """Zero-pads height and width (bottom/right) up to a multiple; returns the original size."""
    height, width = x.shape[-2:]
    pad_h = (-height) % multiple
    pad_w = (-width) % multiple
    if pad_h or pad_w:
        x = F.pad(x, (0, pad_w, 0, pad_h))
    return x, (height, width)


class SpadeNet(nn.Module):
    """Sparse-to-dense network with a depth head and an uncertainty head."""

    def __init__(self, arch: SpadeArch = SpadeArch()):
        super().__init__()
        self.arch = arch
        self.encoder = Encoder(2, arch.base_channels, arch.levels)
        self.depth_decoder = Decoder(arch.base_channels, arch.levels)
        self.uncertainty_decoder = Decoder(arch.base_channels, arch.levels)

    def forward(self, sparse: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        """
        Args:
            sparse: (N, 1, H, W) sparse depth in meters, zero where unmeasured

        Returns:
            (zhat, sigma), each (N, 1, H, W): depth in (0, max_depth] and log uncertainty in [-10, 10]
        """
        if sparse.dim() != 4 or sparse.shape[1] != 1:
            raise InputError(f"SpaDe expects (N, 1, H, W) sparse depth, got {tuple(sparse.shape)}")
        if not torch.isfinite(sparse).all():
            raise InputError("SpaDe input contains non-finite values")
        x = torch.cat([sparse / self.arch.max_depth, (sparse > 0).to(sparse.dtype)], dim=1)
        x, (height, width) = pad_to_multiple(x, 2 ** self.arch.levels)
        features = self.encoder(x)
        depth_logits = self.depth_decoder(features)[..., :height, :width]
        sigma_raw = self.uncertainty_decoder(features)[..., :height, :width]
        zhat = torch.clamp(self.arch.max_depth * torch.sigmoid(depth_logits), min=self.arch.min_depth)
        sigma = torch.clamp(sigma_raw, -UNCERTAINTY_CLAMP, UNCERTAINTY_CLAMP)
        return zhat, sigma

    def partition(self) -> Dict[str, str]:
        """Maps every parameter name to its partition."""
        return {name: name.split(".", 1)[0] for name, _ in self.named_parameters()}

    def partition_parameters(self, group: str) -> List[nn.Parameter]:
        if group not in PARTITIONS:
            raise ValueError(f"Unknown parameter partition: {group}")
        return list(getattr(self, group).parameters())

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())


@dataclass
class SpadeOutput:
    """Dense depth and its log uncertainty."""
    zhat: DepthMap
    sigma: UncertaintyMap


@torch.no_grad()
def predict_batch(model: SpadeNet, sparse: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
    """Inference on a batch of sparse maps; the model is left in eval mode."""
    model.eval()
    param = next(model.parameters())
    return model(sparse.to(dtype=param.dtype, device=param.device))


def spade_forward(z: SparseDepthMap, model: SpadeNet) -> SpadeOutput:
    """
    Runs SpaDe on a single sparse map.

    Args:
        z: Sparse depth map
        model: SpaDe parameters

    Returns:
        SpadeOutput with ẑ valid everywhere and σ̂ clamped to [-10, 10]

    Raises:
        InputError: If the input holds non-finite values
    """
    sparse = torch.from_numpy(np.ascontiguousarray(z.values))[None, None]
    zhat, sigma = predict_batch(model, sparse)
    zhat_np = zhat[0, 0].cpu().numpy()
    return SpadeOutput(zhat=DepthMap.dense(zhat_np), sigma=UncertaintyMap(sigma[0, 0].cpu().numpy()))
