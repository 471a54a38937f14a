#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Configuration models for spade_url.
Defines Pydantic models for every configurable component and the root RunConfig.
"""

import copy
import hashlib
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Tuple, Type, TypeVar, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigurationError
from .utils import load_config

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent / "config" / "default.yaml"


class StrictModel(BaseModel):
    """Base model rejecting unknown keys."""
    model_config = ConfigDict(extra="forbid", frozen=True)


class CameraIntrinsics(StrictModel):
    """Pinhole intrinsics of the camera the sparse depth is projected into."""
    fx: float = Field(560.0, gt=0, description="Focal length along x, pixels")
    fy: float = Field(560.0, gt=0, description="Focal length along y, pixels")
    cx: float = Field(384.0, description="Principal point x, pixels")
    cy: float = Field(288.0, description="Principal point y, pixels")
    width: int = Field(768, ge=1)
    height: int = Field(576, ge=1)

    @model_validator(mode="after")
    def _principal_point_inside(self) -> "CameraIntrinsics":
        if not (0 <= self.cx < self.width) or not (0 <= self.cy < self.height):
            raise ValueError(
                f"principal point ({self.cx}, {self.cy}) outside image {self.width}x{self.height}"
            )
        return self


class AugmentConfig(StrictModel):
    """Training augmentations: color jitter, random resize and crop, horizontal flip."""
    flip_prob: float = Field(0.5, ge=0.0, le=1.0)
    resize_range: Tuple[float, float] = (1.0, 1.25)
    crop: Optional[Tuple[int, int]] = (544, 704)
    brightness: float = Field(0.2, ge=0.0)
    contrast: float = Field(0.2, ge=0.0)
    saturation: float = Field(0.2, ge=0.0)

    @field_validator("resize_range")
    @classmethod
    def _check_resize_range(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        lo, hi = value
        if not (0 < lo <= hi):
            raise ValueError(f"resize_range must satisfy 0 < lo <= hi, got {value}")
        return value

    @classmethod
    def identity(cls) -> "AugmentConfig":
        """Returns a configuration that leaves samples untouched."""
        return cls(flip_prob=0.0, resize_range=(1.0, 1.0), crop=None,
                   brightness=0.0, contrast=0.0, saturation=0.0)


class SceneConfig(StrictModel):
    """Procedural scene parameters."""
    num_primitives: int = Field(6, ge=0)
    depth_range: Tuple[float, float] = (1.0, 80.0)
    ground_plane: bool = True
    camera_height: float = Field(1.6, gt=0)
    image_size: Tuple[int, int] = (576, 768)
    intrinsics: CameraIntrinsics = CameraIntrinsics()

    @model_validator(mode="after")
    def _check_scene(self) -> "SceneConfig":
        lo, hi = self.depth_range
        if not (0 < lo < hi):
            raise ValueError(f"depth_range must satisfy 0 < min < max, got {self.depth_range}")
        height, width = self.image_size
        if (self.intrinsics.height, self.intrinsics.width) != (height, width):
            raise ValueError("intrinsics width/height must match image_size")
        return self


class LidarPattern(StrictModel):
    """Ring pattern of a spinning LiDAR."""
    num_beams: int = Field(32, ge=1)
    vertical_fov: Tuple[float, float] = (-30.0, 10.0)
    azimuth_step: float = Field(0.2, gt=0)
    dropout_prob: float = Field(0.1, ge=0.0, le=1.0)

    @field_validator("vertical_fov")
    @classmethod
    def _check_fov(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        if not value[0] < value[1]:
            raise ValueError(f"vertical_fov must satisfy lo < hi, got {value}")
        return value


class DatasetConfig(StrictModel):
    """Synthetic dataset size and split."""
    n_scenes: int = Field(200, ge=0)
    night_ratio: float = Field(0.125, ge=0.0, le=1.0)
    heldout_fraction: float = Field(0.2, ge=0.0, le=1.0)
    num_workers: int = Field(1, ge=1)


class SpadeArch(StrictModel):
    """SpaDe encoder-decoder shape."""
    levels: int = Field(4, ge=2)
    base_channels: int = Field(16, ge=1)
    max_depth: float = Field(80.0, gt=0)
    min_depth: float = Field(1e-3, gt=0)


class SpadeTrainConfig(StrictModel):
    """Optimizer schedule of one SpaDe training stage."""
    lr: float = Field(2e-4, ge=0.0)
    epochs: int = Field(30, ge=0)
    milestones: List[int] = Field(default_factory=list)
    gamma: float = Field(0.5, gt=0.0)
    batch_size: int = Field(4, ge=1)
    max_steps_per_epoch: Optional[int] = Field(None, ge=1)
    num_workers: int = Field(0, ge=0)


class SpadeConfig(StrictModel):
    arch: SpadeArch = SpadeArch()
    stage1: SpadeTrainConfig = SpadeTrainConfig()
    stage2: SpadeTrainConfig = SpadeTrainConfig(epochs=55, milestones=[25, 40])


class FusionConfig(StrictModel):
    """Plug-and-play threshold and URL weighting hyperparameters."""
    tau: float = 5.0
    alpha: float = Field(0.8, gt=0)
    beta: float = 0.0

    @field_validator("tau")
    @classmethod
    def _check_tau(cls, value: float) -> float:
        # -inf disables substitution entirely; NaN and +inf have no meaning.
        if math.isnan(value) or value == math.inf:
            raise ValueError(f"tau must be finite or -inf, got {value}")
        return value


class LossConfig(StrictModel):
    """Supervised norm and weights of the URL objective."""
    p_norm: Literal[1, 2] = 2
    w_sup: float = Field(1.0, ge=0.0, allow_inf_nan=False)
    w_sm: float = Field(0.1, ge=0.0, allow_inf_nan=False)


class BackboneArch(StrictModel):
    """Registered downstream backbone and its shape."""
    name: str = "reference"
    levels: int = Field(3, ge=1)
    base_channels: int = Field(16, ge=1)
    max_depth: float = Field(80.0, gt=0)


class UrlConfig(StrictModel):
    """Downstream training: fusion, objective, optimizer and crop."""
    mode: Literal["url", "augment", "sparse"] = "url"
    backbone: BackboneArch = BackboneArch()
    fusion: FusionConfig = FusionConfig()
    loss: LossConfig = LossConfig()
    lr: float = Field(1e-3, ge=0.0)
    epochs: int = Field(30, ge=0)
    milestones: List[int] = Field(default_factory=lambda: [10, 20, 25])
    gamma: float = Field(0.5, gt=0.0)
    batch_size: int = Field(4, ge=1)
    max_steps_per_epoch: Optional[int] = Field(None, ge=1)
    num_workers: int = Field(0, ge=0)
    crop: Optional[Tuple[int, int]] = (544, 704)


class EvalConfig(StrictModel):
    """Evaluation protocol."""
    max_depth: float = Field(80.0, gt=0)
    crop: Optional[Tuple[int, int]] = None
    split: Optional[Literal["train", "heldout"]] = "heldout"
    plots: bool = False


class RunConfig(StrictModel):
    """Root configuration document covering every component."""
    seed: int = 0
    dataset: DatasetConfig = DatasetConfig()
    scene: SceneConfig = SceneConfig()
    lidar: LidarPattern = LidarPattern()
    augment: AugmentConfig = AugmentConfig()
    spade: SpadeConfig = SpadeConfig()
    url: UrlConfig = UrlConfig()
    evaluation: EvalConfig = EvalConfig()

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form of this configuration."""
        canonical = json.dumps(self.model_dump(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def validate_model(model_cls: Type[ModelT], data: Union[Mapping[str, Any], BaseModel]) -> ModelT:
    """
    Validates data against a config model, raising ConfigurationError on failure.

    Args:
        model_cls: Pydantic model class
        data: Mapping or model instance to (re)validate

    Returns:
        Validated model instance

    Raises:
        ConfigurationError: If validation fails
    """
    if isinstance(data, BaseModel):
        data = dict(data.__dict__)
    try:
        return model_cls.model_validate(data)
    except ValidationError as e:
        error_msg = f"Invalid {model_cls.__name__}: {e}"
        logger.error(error_msg)
        raise ConfigurationError(error_msg) from e


def deep_merge(base: Dict[str, Any], update: Mapping[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in update.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def parse_overrides(pairs: List[str]) -> Dict[str, Any]:
    """
    Parses ``dotted.key=value`` strings into a nested mapping.

    Values are read as YAML scalars so ``1e-3``, ``true`` and ``[1, 2]`` keep their types.

    Raises:
        ConfigurationError: If a pair has no ``=``
    """
    nested: Dict[str, Any] = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigurationError(f"Override must look like key=value, got: {pair}")
        key, raw = pair.split("=", 1)
        value = yaml.safe_load(raw)
        node = nested
        parts = key.strip().split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    return nested


def load_run_config(config_path: Optional[str] = None,
                    overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """
    Builds the run configuration: defaults, then the config file, then overrides.

    Args:
        config_path: Optional YAML/JSON configuration file
        overrides: Nested mapping applied last (flags win)

    Returns:
        Validated RunConfig

    Raises:
        ConfigurationError: If the file is missing/unparsable or keys/values are invalid
    """
    document = RunConfig().model_dump(mode="json")
    if config_path:
        try:
            document = deep_merge(document, load_config(config_path))
        except (OSError, yaml.YAMLError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"Cannot load configuration {config_path}: {e}") from e
    if overrides:
        document = deep_merge(document, overrides)
    config = validate_model(RunConfig, document)
    logger.info(f"Run configuration ready (digest {config.digest()[:12]})")
    return config
