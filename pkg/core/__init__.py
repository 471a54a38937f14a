"""
Core module for spade_url.
Contains shared utilities, the error hierarchy, run configuration and the checkpoint container.
"""

from .errors import (
    CheckpointError,
    CheckpointVersionError,
    ConfigurationError,
    DimensionError,
    DivergenceError,
    FormatError,
    InputError,
    SpadeUrlError,
    UndefinedLossError,
    UndefinedMetricError,
)
from .utils import get_cache_dir, seed_everything, setup_logging

__all__ = [
    'CheckpointError', 'CheckpointVersionError', 'ConfigurationError', 'DimensionError',
    'DivergenceError', 'FormatError', 'InputError', 'SpadeUrlError', 'UndefinedLossError',
    'UndefinedMetricError', 'get_cache_dir', 'seed_everything', 'setup_logging',
]
