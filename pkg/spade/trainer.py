#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Two-stage SpaDe training.

Stage 1 fits the encoder and depth decoder to dense synthetic ground truth
with the L2 depth loss. Stage 2 freezes both and fits the uncertainty decoder
with the Gaussian log-uncertainty loss.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import torch
from torch.optim.lr_scheduler import MultiStepLR
from torch.utils.data import Dataset

from core.config import SpadeArch, SpadeTrainConfig
from core.errors import ConfigurationError, DivergenceError
from core.utils import seed_everything

from depthmap.dataset import make_loader
from losses.objectives import loss_depth_l2, loss_uncertainty

from .network import SpadeNet

logger = logging.getLogger(__name__)


@dataclass
class TrainState:
    """SpaDe parameters plus training progress."""
    model: SpadeNet
    stage: int = 0
    epoch: int = 0
    seed: int = 0
    optimizer_state: Optional[Dict] = None
    history: List[Dict[str, float]] = field(default_factory=list)


LossFn = Callable[[SpadeNet, Dict[str, torch.Tensor]], torch.Tensor]


def _stage1_loss(model: SpadeNet, batch: Dict[str, torch.Tensor]) -> torch.Tensor:
    zhat, _ = model(batch["sparse"])
    return loss_depth_l2(zhat, batch["gt"], batch["valid"])


def _stage2_loss(model: SpadeNet, batch: Dict[str, torch.Tensor]) -> torch.Tensor:
    zhat, sigma = model(batch["sparse"])
    return loss_uncertainty(zhat.detach(), sigma, batch["gt"], batch["valid"])


def _run_stage(state: TrainState, dataset: Dataset, hyper: SpadeTrainConfig,
               parameters: List[torch.nn.Parameter], loss_fn: LossFn, stage: int) -> TrainState:
    model = state.model
    optimizer = torch.optim.Adam(parameters, lr=hyper.lr)
    scheduler = MultiStepLR(optimizer, milestones=list(hyper.milestones), gamma=hyper.gamma)
    loader = make_loader(dataset, hyper.batch_size, seed=state.seed + stage,
                         num_workers=hyper.num_workers)
    dtype = next(model.parameters()).dtype

    step = 0
    last_finite: Optional[float] = None
    for epoch in range(hyper.epochs):
        if hasattr(dataset, "set_epoch"):
            dataset.set_epoch(epoch)
        model.train()
        epoch_losses = []
        for batch_index, batch in enumerate(loader):
            if hyper.max_steps_per_epoch is not None and batch_index >= hyper.max_steps_per_epoch:
                break
            batch = {key: value.to(dtype) for key, value in batch.items()
                     if key in ("sparse", "gt", "valid")}
            loss = loss_fn(model, batch)
            value = float(loss.detach())
            if not math.isfinite(value):
                logger.error(f"Non-finite loss in stage {stage}, epoch {epoch}, step {step}")
                raise DivergenceError(f"spade-stage{stage}", epoch, step, last_finite)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()

            last_finite = value
            epoch_losses.append(value)
            state.history.append({"stage": stage, "epoch": epoch, "step": step, "loss": value,
                                  "lr": optimizer.param_groups[0]["lr"]})
            logger.debug(f"stage {stage} epoch {epoch} step {step}: loss {value:.6f}")
            step += 1
        scheduler.step()
        state.epoch = epoch + 1
        if epoch_losses:
            logger.info(f"SpaDe stage {stage} epoch {epoch + 1}/{hyper.epochs}: "
                        f"mean loss {sum(epoch_losses) / len(epoch_losses):.6f}")

    state.stage = stage
    state.optimizer_state = optimizer.state_dict()
    return state


def train_spade_stage1(dataset: Dataset, hyper: SpadeTrainConfig, arch: SpadeArch = SpadeArch(),
                       seed: int = 0, state: Optional[TrainState] = None) -> TrainState:
    """
    Trains encoder and depth decoder with the L2 depth loss.

    Args:
        dataset: Items with ``sparse``, ``gt`` and ``valid`` tensors
        hyper: Optimizer schedule
        arch: Architecture of a freshly initialized network (ignored when ``state`` is given)
        seed: Seed of initialization, shuffling and augmentation
        state: Optional state to continue from

    Returns:
        TrainState after stage 1

    Raises:
        DivergenceError: If the loss becomes non-finite
    """
    seed_everything(seed)
    if state is None:
        state = TrainState(model=SpadeNet(arch), seed=seed)
        logger.info(f"Initialized SpaDe with {state.model.parameter_count()} parameters")
    model = state.model
    parameters = model.partition_parameters("encoder") + model.partition_parameters("depth_decoder")
    logger.info(f"SpaDe stage 1: {hyper.epochs} epochs at lr {hyper.lr}")
    return _run_stage(state, dataset, hyper, parameters, _stage1_loss, stage=1)


def train_spade_stage2(state: TrainState, dataset: Dataset, hyper: SpadeTrainConfig) -> TrainState:
    """
    Trains the uncertainty decoder with encoder and depth decoder frozen.

    Raises:
        ConfigurationError: If stage 1 has not been completed
        DivergenceError: If the loss becomes non-finite
    """
    if state.stage < 1:
        error_msg = "SpaDe stage 2 requires a stage-1 checkpoint"
        logger.error(error_msg)
        raise ConfigurationError(error_msg)
    seed_everything(state.seed + 2)
    model = state.model
    frozen = model.partition_parameters("encoder") + model.partition_parameters("depth_decoder")
    for parameter in frozen:
        parameter.requires_grad_(False)
    logger.info(f"SpaDe stage 2: {hyper.epochs} epochs at lr {hyper.lr}, milestones {hyper.milestones}")
    try:
        return _run_stage(state, dataset, hyper, model.partition_parameters("uncertainty_decoder"),
                          _stage2_loss, stage=2)
    finally:
        for parameter in frozen:
            parameter.requires_grad_(True)
