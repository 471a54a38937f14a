#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Training of downstream backbones on the all-day dataset.

SpaDe stays frozen throughout; only backbone parameters reach the optimizer.
The objective is w_sm·L_sm + w_sup·L_sup on the final prediction d.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Union

import torch
from torch.optim.lr_scheduler import MultiStepLR
from torch.utils.data import Dataset, Subset

from core.checkpoint import PathLike
from core.config import FusionConfig, UrlConfig
from core.errors import ConfigurationError, DivergenceError
from core.utils import seed_everything

from depthmap.dataset import make_loader
from losses.objectives import url_objective
from spade.checkpoint import load_checkpoint
from spade.network import SpadeNet

from .factory import BackboneFactory
from .interface import BackboneInterface
from .url import MODES, UrlModel

logger = logging.getLogger(__name__)


@dataclass
class BackboneState:
    """Trained backbone with the regime and fusion settings it was trained under."""
    backbone: BackboneInterface
    mode: str = "url"
    fusion: FusionConfig = FusionConfig()
    epoch: int = 0
    seed: int = 0
    optimizer_state: Optional[Dict] = None
    history: List[Dict[str, float]] = field(default_factory=list)


def _item_tags(dataset: Dataset) -> List[str]:
    if hasattr(dataset, "records"):
        return [record.tag for record in dataset.records]
    if hasattr(dataset, "samples"):
        return [sample.tag for sample in dataset.samples]
    return [dataset[index]["tag"] for index in range(len(dataset))]


def select_tags(dataset: Dataset, tags: Optional[Iterable[str]]) -> Dataset:
    """Restricts a dataset to items carrying one of ``tags``."""
    if tags is None:
        return dataset
    wanted = set(tags)
    indices = [index for index, tag in enumerate(_item_tags(dataset)) if tag in wanted]
    if not indices:
        error_msg = f"No training samples tagged {sorted(wanted)}"
        logger.error(error_msg)
        raise ConfigurationError(error_msg)
    logger.info(f"Training on {len(indices)} of {len(dataset)} samples tagged {sorted(wanted)}")
    return Subset(dataset, indices)


def train_backbone(dataset: Dataset, cfg: UrlConfig, spade: Optional[SpadeNet] = None,
                   mode: Optional[str] = None, tags: Optional[Iterable[str]] = None,
                   seed: int = 0) -> BackboneState:
    """
    Trains the configured backbone in one of the regimes ``sparse``, ``augment`` or ``url``.

    Args:
        dataset: Items with ``image``, ``sparse``, ``gt`` and ``valid`` tensors
        cfg: Backbone, fusion, objective and optimizer configuration
        spade: SpaDe parameters (required outside ``sparse`` mode); frozen here
        mode: Regime, defaults to ``cfg.mode``
        tags: Optional illumination tags to train on
        seed: Seed of initialization and shuffling

    Returns:
        BackboneState of the trained backbone

    Raises:
        ConfigurationError: If mode, backbone and SpaDe do not fit together
        DivergenceError: If the loss becomes non-finite
    """
    mode = mode or cfg.mode
    if mode not in MODES:
        raise ConfigurationError(f"Unknown training mode: {mode}")
    seed_everything(seed)
    backbone = BackboneFactory().create_backbone(cfg.backbone, cfg.loss.p_norm)
    model = UrlModel(backbone, spade, mode=mode, fusion=cfg.fusion)
    loss_cfg = cfg.loss.model_copy(update={"p_norm": backbone.loss_p_norm})

    base = dataset
    dataset = select_tags(dataset, tags)
    optimizer = torch.optim.Adam(backbone.parameters(), lr=cfg.lr)
    scheduler = MultiStepLR(optimizer, milestones=list(cfg.milestones), gamma=cfg.gamma)
    loader = make_loader(dataset, cfg.batch_size, seed=seed, num_workers=cfg.num_workers)
    dtype = next(backbone.parameters()).dtype
    state = BackboneState(backbone=backbone, mode=mode, fusion=cfg.fusion, seed=seed)
    logger.info(f"Training backbone {cfg.backbone.name} in {mode} mode: {cfg.epochs} epochs at lr {cfg.lr}")

    step = 0
    last_finite: Optional[float] = None
    for epoch in range(cfg.epochs):
        if hasattr(base, "set_epoch"):
            base.set_epoch(epoch)
        model.train()
        epoch_losses = []
        for batch_index, batch in enumerate(loader):
            if cfg.max_steps_per_epoch is not None and batch_index >= cfg.max_steps_per_epoch:
                break
            image, sparse = batch["image"].to(dtype), batch["sparse"].to(dtype)
            gt, valid = batch["gt"].to(dtype), batch["valid"].to(dtype)
            d, _ = model(image, sparse)
            loss, parts = url_objective(d, gt, image, loss_cfg, valid)
            value = float(loss.detach())
            if not math.isfinite(value):
                logger.error(f"Non-finite loss in {mode} training, epoch {epoch}, step {step}")
                raise DivergenceError(f"backbone-{mode}", epoch, step, last_finite)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()

            last_finite = value
            epoch_losses.append(value)
            state.history.append({"epoch": epoch, "step": step, "loss": value,
                                  "supervised": float(parts.supervised.detach()),
                                  "smoothness": float(parts.smoothness.detach()),
                                  "lr": optimizer.param_groups[0]["lr"]})
            logger.debug(f"{mode} epoch {epoch} step {step}: loss {value:.6f}")
            step += 1
        scheduler.step()
        state.epoch = epoch + 1
        if epoch_losses:
            logger.info(f"Backbone epoch {epoch + 1}/{cfg.epochs}: mean loss "
                        f"{sum(epoch_losses) / len(epoch_losses):.6f}")

    state.optimizer_state = optimizer.state_dict()
    return state


def train_url(spade_ckpt: Union[SpadeNet, PathLike], dataset: Dataset, cfg: UrlConfig,
              seed: int = 0) -> BackboneState:
    """
    Uncertainty-driven residual learning: ``train_backbone`` in ``url`` mode.

    Args:
        spade_ckpt: SpaDe network or the path of a SpaDe checkpoint
    """
    spade = spade_ckpt if isinstance(spade_ckpt, SpadeNet) else load_checkpoint(spade_ckpt).model
    return train_backbone(dataset, cfg, spade=spade, mode="url", seed=seed)
