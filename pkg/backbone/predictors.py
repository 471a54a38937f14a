#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Per-sample predictors for evaluation, one per method of the results table.
"""

import logging
from typing import Callable, Optional

import numpy as np
import torch

from core.config import FusionConfig

from depthmap.types import DepthMap, Sample
from fusion.merge import merge_plug_and_play
from spade.network import SpadeNet, spade_forward

from .interface import BackboneInterface
from .reference import backbone_predict
from .trainer import BackboneState
from .url import UrlModel

logger = logging.getLogger(__name__)

ModelFn = Callable[[Sample], DepthMap]


def spade_model_fn(spade: SpadeNet) -> ModelFn:
    """SpaDe depth ẑ used directly as the dense prediction."""
    def predict(sample: Sample) -> DepthMap:
        return spade_forward(sample.sparse, spade).zhat
    return predict


def sparse_backbone_model_fn(backbone: BackboneInterface) -> ModelFn:
    """Backbone on its native raw sparse input."""
    def predict(sample: Sample) -> DepthMap:
        return backbone_predict(backbone, sample.image, sample.sparse.values)
    return predict


def plug_and_play_model_fn(backbone: BackboneInterface, spade: SpadeNet,
                           fusion: FusionConfig = FusionConfig()) -> ModelFn:
    """Backbone on the sparse map densified with confident SpaDe predictions."""
    def predict(sample: Sample) -> DepthMap:
        output = spade_forward(sample.sparse, spade)
        merged = merge_plug_and_play(sample.sparse, output.zhat, output.sigma, fusion)
        return backbone_predict(backbone, sample.image, merged.values)
    return predict


def trained_model_fn(state: BackboneState, spade: Optional[SpadeNet] = None) -> ModelFn:
    """Backbone in the regime it was trained in (``sparse``, ``augment`` or ``url``)."""
    model = UrlModel(state.backbone, spade, mode=state.mode, fusion=state.fusion)
    model.eval()
    param = next(state.backbone.parameters())

    @torch.no_grad()
    def predict(sample: Sample) -> DepthMap:
        image = torch.from_numpy(np.ascontiguousarray(sample.image.values))[None].to(param.dtype)
        sparse = torch.from_numpy(np.ascontiguousarray(sample.sparse.values))[None, None].to(param.dtype)
        d, _ = model(image, sparse)
        return DepthMap.dense(d[0, 0].cpu().numpy())
    return predict
