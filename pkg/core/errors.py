#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Exception hierarchy for spade_url.

Every error carries the process exit code the command-line surface reports:
0 success, 1 I/O, 2 configuration, 3 numerical failure.
"""

from typing import Optional

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class SpadeUrlError(Exception):
    """Base class for all domain errors."""
    exit_code = EXIT_CONFIG


class ConfigurationError(SpadeUrlError):
    """Invalid configuration, intrinsics, missing checkpoint or unknown name."""
    exit_code = EXIT_CONFIG


class DimensionError(SpadeUrlError):
    """Raster shapes do not agree or a crop exceeds the raster."""
    exit_code = EXIT_CONFIG


class InputError(SpadeUrlError):
    """Input values violate a precondition (non-finite, wrong channels, out of range)."""
    exit_code = EXIT_CONFIG


class FormatError(SpadeUrlError):
    """A file on disk does not follow the expected format."""
    exit_code = EXIT_IO


class CheckpointError(SpadeUrlError):
    """A checkpoint file cannot be read."""
    exit_code = EXIT_IO


class CheckpointVersionError(CheckpointError):
    """A checkpoint was written with an incompatible format version."""
    exit_code = EXIT_CONFIG


class UndefinedLossError(SpadeUrlError):
    """A loss reduction has no valid pixel to average over."""
    exit_code = EXIT_NUMERICAL


class UndefinedMetricError(SpadeUrlError):
    """A metric has no valid pixel to evaluate."""
    exit_code = EXIT_NUMERICAL


class DivergenceError(SpadeUrlError):
    """Training produced a non-finite loss."""
    exit_code = EXIT_NUMERICAL

    def __init__(self, stage: str, epoch: int, step: int, last_finite_loss: Optional[float]):
        self.stage = stage
        self.epoch = epoch
        self.step = step
        self.last_finite_loss = last_finite_loss
        super().__init__(
            f"Training diverged in {stage} at epoch {epoch}, step {step} "
            f"(last finite loss: {last_finite_loss})"
        )
