#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Training-free evaluation of a pretrained backbone with SpaDe preprocessing.
"""

import logging
from typing import Dict, Optional, Sequence, Tuple, Union

from core.config import EvalConfig, FusionConfig
from core.errors import ConfigurationError

from depthmap.manifest import Manifest
from depthmap.types import Sample
from evaluation.evaluator import SplitReport, evaluate
from spade.network import SpadeNet

from .interface import BackboneInterface
from .predictors import plug_and_play_model_fn, sparse_backbone_model_fn

logger = logging.getLogger(__name__)

BASELINE = "baseline"
PLUG_AND_PLAY = "+SpaDe"


def plug_and_play_eval(backbone: BackboneInterface, data: Union[Manifest, Sequence[Sample]],
                       spade: SpadeNet, cfg: FusionConfig = FusionConfig(),
                       eval_cfg: EvalConfig = EvalConfig(),
                       config_digest: Optional[str] = None) -> Dict[str, SplitReport]:
    """
    Evaluates a backbone on raw sparse input and on the plug-and-play merged input.

    The backbone is only run for inference; its parameters are not touched.

    Args:
        backbone: Pretrained backbone with a native sparse-depth input
        data: Manifest or in-memory samples
        spade: SpaDe network used for preprocessing
        cfg: Fusion configuration (threshold ``tau``)
        eval_cfg: Evaluation protocol

    Returns:
        Reports keyed ``baseline`` and ``+SpaDe``

    Raises:
        ConfigurationError: If the backbone does not read a single sparse-depth channel
    """
    if backbone.depth_channels != 1:
        error_msg = (f"Plug-and-play needs a backbone with a native sparse-depth input, "
                     f"{backbone.arch.name} reads {backbone.depth_channels} depth channels")
        logger.error(error_msg)
        raise ConfigurationError(error_msg)

    crop: Optional[Tuple[int, int]] = tuple(eval_cfg.crop) if eval_cfg.crop is not None else None
    common = dict(crop=crop, split=eval_cfg.split, max_depth=eval_cfg.max_depth, config_digest=config_digest)
    reports = {
        BASELINE: evaluate(sparse_backbone_model_fn(backbone), data, method=BASELINE, **common),
        PLUG_AND_PLAY: evaluate(plug_and_play_model_fn(backbone, spade, cfg), data,
                                method=PLUG_AND_PLAY, **common),
    }
    logger.info(f"Plug-and-play evaluation done (tau={cfg.tau})")
    return reports
