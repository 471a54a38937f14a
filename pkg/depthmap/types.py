#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Raster types shared across the pipeline.

All rasters are H×W numpy arrays (images are 3×H×W). Depth is stored in
meters; zero marks a missing measurement in sparse maps.
"""

import logging
from dataclasses import dataclass, field
from typing import Literal, Optional, Tuple

import numpy as np

from core.errors import DimensionError, InputError

logger = logging.getLogger(__name__)

UNCERTAINTY_CLAMP = 10.0
TAGS = ("day", "night")

Tag = Literal["day", "night"]


def _as_float_array(values) -> np.ndarray:
    array = np.asarray(values)
    if array.dtype == np.float64:
        return array.copy()
    return array.astype(np.float32)


def _check_grid(values: np.ndarray, name: str) -> None:
    if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
        raise DimensionError(f"{name} must be a non-empty H×W grid, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise InputError(f"{name} contains non-finite values")


@dataclass(frozen=True)
class DepthMap:
    """Dense depth in meters with a validity mask."""
    values: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        values = _as_float_array(self.values)
        valid = np.asarray(self.valid, dtype=bool)
        _check_grid(values, "DepthMap")
        if valid.shape != values.shape:
            raise DimensionError(f"validity mask {valid.shape} does not match depth {values.shape}")
        if np.any(values < 0):
            raise InputError("DepthMap values must be non-negative")
        if np.any(values[valid] <= 0):
            raise InputError("DepthMap values must be positive wherever valid")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "valid", valid)

    @classmethod
    def from_values(cls, values) -> "DepthMap":
        """Builds a map whose valid pixels are exactly the positive ones."""
        values = _as_float_array(values)
        return cls(values=values, valid=values > 0)

    @classmethod
    def dense(cls, values) -> "DepthMap":
        """Builds a map that is valid everywhere (values must be positive)."""
        values = _as_float_array(values)
        return cls(values=values, valid=np.ones(values.shape, dtype=bool))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class SparseDepthMap:
    """Depth where measured, zero elsewhere."""
    values: np.ndarray

    def __post_init__(self):
        values = _as_float_array(self.values)
        _check_grid(values, "SparseDepthMap")
        if np.any(values < 0):
            raise InputError("SparseDepthMap values must be non-negative")
        object.__setattr__(self, "values", values)

    @classmethod
    def empty(cls, height: int, width: int) -> "SparseDepthMap":
        return cls(np.zeros((height, width), dtype=np.float32))

    @property
    def valid(self) -> np.ndarray:
        return self.values > 0

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    @property
    def density(self) -> float:
        """Fraction of measured pixels."""
        return float(self.valid.mean())

    def to_depth_map(self) -> DepthMap:
        return DepthMap(values=self.values, valid=self.valid)


@dataclass(frozen=True)
class UncertaintyMap:
    """Log-scale predictive uncertainty, clamped to [-10, 10]."""
    values: np.ndarray

    def __post_init__(self):
        values = _as_float_array(self.values)
        _check_grid(values, "UncertaintyMap")
        object.__setattr__(self, "values", np.clip(values, -UNCERTAINTY_CLAMP, UNCERTAINTY_CLAMP))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class Image:
    """RGB intensities in [0, 1], channels first."""
    values: np.ndarray

    def __post_init__(self):
        values = _as_float_array(self.values)
        if values.ndim != 3 or values.shape[0] != 3:
            raise DimensionError(f"Image must have shape 3×H×W, got {values.shape}")
        if not np.all(np.isfinite(values)) or values.min() < 0 or values.max() > 1:
            raise InputError("Image intensities must lie in [0, 1]")
        object.__setattr__(self, "values", values)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape[1:]

    def mean_intensity(self) -> float:
        return float(self.values.mean())


@dataclass(frozen=True)
class Sample:
    """Image, sparse depth, ground truth and illumination tag of one frame."""
    image: Image
    sparse: SparseDepthMap
    gt: DepthMap
    tag: Tag
    sample_id: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        if self.tag not in TAGS:
            raise InputError(f"Sample tag must be one of {TAGS}, got {self.tag!r}")
        shapes = {self.image.shape, self.sparse.shape, self.gt.shape}
        if len(shapes) != 1:
            raise DimensionError(f"Sample rasters disagree in size: {sorted(shapes)}")

    @property
    def shape(self) -> Tuple[int, int]:
        return self.gt.shape
