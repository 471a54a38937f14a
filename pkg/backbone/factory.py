#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Registry of downstream backbones, selected by name (``--backbone``).
"""

import logging
from typing import Dict, List, Type

from core.config import BackboneArch
from core.errors import ConfigurationError
from core.utils import Singleton

from .interface import BackboneInterface
from .reference import ReferenceBackbone, ReferenceSparseBackbone

logger = logging.getLogger(__name__)


class BackboneFactory(metaclass=Singleton):
    """
    Creates backbones from their registered names.
    Implements the Singleton pattern so registrations are shared process-wide.
    """

    def __init__(self):
        self._backbone_types: Dict[str, Type[BackboneInterface]] = {
            "reference": ReferenceBackbone,
            "reference-sparse": ReferenceSparseBackbone,
        }
        logger.debug(f"Registered backbones: {sorted(self._backbone_types)}")

    def register_backbone(self, name: str, backbone_class: Type[BackboneInterface]) -> None:
        """
        Registers a backbone type.

        Args:
            name: Name used in configuration and on the command line
            backbone_class: Class implementing BackboneInterface

        Raises:
            TypeError: If the class does not implement BackboneInterface
        """
        if not isinstance(backbone_class, type) or not issubclass(backbone_class, BackboneInterface):
            raise TypeError("Backbone class must implement BackboneInterface")
        self._backbone_types[name] = backbone_class
        logger.info(f"Registered backbone type: {name}")

    def get_backbone_class(self, name: str) -> Type[BackboneInterface]:
        if name not in self._backbone_types:
            error_msg = f"Unknown backbone: {name} (registered: {', '.join(self.list_backbones())})"
            logger.error(error_msg)
            raise ConfigurationError(error_msg)
        return self._backbone_types[name]

    def create_backbone(self, arch: BackboneArch, loss_p_norm: int = 2) -> BackboneInterface:
        """
        Instantiates the backbone named by ``arch.name``.

        Raises:
            ConfigurationError: If the name is not registered
        """
        backbone = self.get_backbone_class(arch.name)(arch, loss_p_norm)
        logger.info(f"Created backbone {arch.name} ({backbone.depth_channels} depth channels)")
        return backbone

    def list_backbones(self) -> List[str]:
        return sorted(self._backbone_types)
