#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Reference backbones: a small image-guided encoder-decoder.

``reference`` consumes the packed [z, ẑ, σ̂] input; ``reference-sparse`` is the
same architecture with a single native sparse-depth channel, the kind of
pretrained model plug-and-play preprocessing targets.
"""

import logging

import numpy as np
import torch

from core.config import BackboneArch

from depthmap.types import UNCERTAINTY_CLAMP, DepthMap, Image
from fusion.merge import PackedInput
from spade.network import Decoder, Encoder, pad_to_multiple

from .interface import BackboneInterface

logger = logging.getLogger(__name__)

MIN_DEPTH = 1e-3


class ReferenceBackbone(BackboneInterface):
    """Encoder-decoder over the image, normalized depth channels and a validity mask."""

    depth_channels = 3

    def __init__(self, arch: BackboneArch = BackboneArch(), loss_p_norm: int = 2):
        super().__init__(arch, loss_p_norm)
        in_channels = 3 + self.depth_channels + 1
        self.encoder = Encoder(in_channels, arch.base_channels, arch.levels)
        self.decoder = Decoder(arch.base_channels, arch.levels)

    def _normalize(self, depth: torch.Tensor) -> torch.Tensor:
        sparse = depth[:, :1]
        channels = [sparse / self.arch.max_depth, (sparse > 0).to(depth.dtype)]
        if self.depth_channels == 3:
            channels += [depth[:, 1:2] / self.arch.max_depth, depth[:, 2:3] / UNCERTAINTY_CLAMP]
        return torch.cat(channels, dim=1)

    def forward(self, image: torch.Tensor, depth: torch.Tensor) -> torch.Tensor:
        self.check_inputs(image, depth)
        x = torch.cat([image.to(depth.dtype), self._normalize(depth)], dim=1)
        x, (height, width) = pad_to_multiple(x, 2 ** self.arch.levels)
        logits = self.decoder(self.encoder(x))[..., :height, :width]
        return torch.clamp(self.arch.max_depth * torch.sigmoid(logits), min=MIN_DEPTH)

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())


class ReferenceSparseBackbone(ReferenceBackbone):
    """Reference architecture reading raw sparse depth only."""

    depth_channels = 1


@torch.no_grad()
def backbone_predict(backbone: BackboneInterface, image: Image, depth: np.ndarray) -> DepthMap:
    """Single-frame inference; ``depth`` is (C, H, W) or (H, W) for one channel."""
    backbone.eval()
    param = next(backbone.parameters())
    depth = np.asarray(depth)
    if depth.ndim == 2:
        depth = depth[None]
    image_t = torch.from_numpy(np.ascontiguousarray(image.values))[None].to(param.dtype)
    depth_t = torch.from_numpy(np.ascontiguousarray(depth))[None].to(param.dtype)
    prediction = backbone(image_t, depth_t)
    return DepthMap.dense(prediction[0, 0].cpu().numpy())


def reference_backbone_forward(image: Image, packed: PackedInput, backbone: BackboneInterface) -> DepthMap:
    """Runs a packed-input backbone on one frame."""
    return backbone_predict(backbone, image, packed.values)
