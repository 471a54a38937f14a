#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Contract every downstream depth-completion backbone implements.
"""

from abc import ABC, abstractmethod

import torch
import torch.nn as nn

from core.config import BackboneArch
from core.errors import InputError


class BackboneInterface(nn.Module, ABC):
    """
    Base class for depth-completion backbones.

    A backbone maps an RGB image (N, 3, H, W) and ``depth_channels`` depth
    channels (N, C, H, W) to a strictly positive depth map (N, 1, H, W) of the
    same spatial size. Backbones consuming the packed [z, ẑ, σ̂] input declare
    three depth channels; backbones with a native sparse-depth input declare one.
    """

    depth_channels: int = 3

    def __init__(self, arch: BackboneArch, loss_p_norm: int = 2):
        super().__init__()
        if loss_p_norm not in (1, 2):
            raise ValueError(f"loss_p_norm must be 1 or 2, got {loss_p_norm}")
        self.arch = arch
        self._loss_p_norm = loss_p_norm

    @property
    def loss_p_norm(self) -> int:
        """Norm of the supervised loss this backbone is trained with."""
        return self._loss_p_norm

    def check_inputs(self, image: torch.Tensor, depth: torch.Tensor) -> None:
        """
        Raises:
            InputError: If channel counts or spatial sizes do not match the contract
        """
        if image.dim() != 4 or image.shape[1] != 3:
            raise InputError(f"Backbone expects (N, 3, H, W) images, got {tuple(image.shape)}")
        if depth.dim() != 4 or depth.shape[1] != self.depth_channels:
            raise InputError(f"Backbone {self.arch.name} expects {self.depth_channels} depth channels, "
                             f"got {tuple(depth.shape)}")
        if image.shape[0] != depth.shape[0] or image.shape[-2:] != depth.shape[-2:]:
            raise InputError(f"Image {tuple(image.shape)} and depth {tuple(depth.shape)} are not aligned")

    @abstractmethod
    def forward(self, image: torch.Tensor, depth: torch.Tensor) -> torch.Tensor:
        """
        Predicts dense depth.

        Args:
            image: (N, 3, H, W) intensities in [0, 1]
            depth: (N, depth_channels, H, W) depth input

        Returns:
            (N, 1, H, W) strictly positive depth
        """
        pass
