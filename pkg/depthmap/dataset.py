#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Torch datasets over manifests and in-memory samples.

Items are dictionaries of float32 tensors: ``image`` (3,H,W), ``sparse``
(1,H,W), ``gt`` (1,H,W), ``valid`` (1,H,W), plus ``tag`` and ``index``.
"""

import logging
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import torch
from torch.utils.data import DataLoader, Dataset

from core.config import AugmentConfig

from .manifest import Manifest, ManifestRecord, load_sample
from .transforms import augment as augment_sample
from .transforms import bottom_crop
from .types import Sample

logger = logging.getLogger(__name__)


def sample_to_tensors(sample: Sample) -> Dict[str, torch.Tensor]:
    """Tensor view of a sample (float32, channels first)."""
    return {
        "image": torch.from_numpy(np.ascontiguousarray(sample.image.values, dtype=np.float32)),
        "sparse": torch.from_numpy(np.ascontiguousarray(sample.sparse.values, dtype=np.float32))[None],
        "gt": torch.from_numpy(np.ascontiguousarray(sample.gt.values, dtype=np.float32))[None],
        "valid": torch.from_numpy(np.ascontiguousarray(sample.gt.valid, dtype=np.float32))[None],
    }


class _SampleDataset(Dataset):
    """Shared augmentation/crop logic; subclasses provide ``_load``."""

    def __init__(self, augment: Optional[AugmentConfig] = None,
                 crop: Optional[Tuple[int, int]] = None, seed: int = 0):
        self.augment = augment
        self.crop = crop
        self.seed = seed
        self.epoch = 0

    def set_epoch(self, epoch: int) -> None:
        """Changes the augmentation draw for the next pass."""
        self.epoch = epoch

    def _load(self, index: int) -> Sample:
        raise NotImplementedError

    def __getitem__(self, index: int) -> Dict[str, object]:
        sample = self._load(index)
        if self.augment is not None:
            seed = int(np.random.SeedSequence([self.seed, self.epoch, index]).generate_state(1)[0])
            sample = augment_sample(sample, self.augment, seed)
        if self.crop is not None:
            sample = bottom_crop(sample, *self.crop)
        item: Dict[str, object] = sample_to_tensors(sample)
        item["tag"] = sample.tag
        item["index"] = index
        return item


class SampleListDataset(_SampleDataset):
    """Dataset over samples already in memory."""

    def __init__(self, samples: Sequence[Sample], **kwargs):
        super().__init__(**kwargs)
        self.samples = list(samples)

    def __len__(self) -> int:
        return len(self.samples)

    def _load(self, index: int) -> Sample:
        return self.samples[index]


class ManifestDataset(_SampleDataset):
    """Dataset reading the records of a manifest from disk."""

    def __init__(self, manifest: Manifest, split: Optional[str] = None,
                 tags: Optional[Iterable[str]] = None, **kwargs):
        super().__init__(**kwargs)
        self.manifest = manifest
        self.records: List[ManifestRecord] = manifest.select(split=split, tags=tags)
        logger.info(f"Dataset over {len(self.records)} records (split={split}, tags={tags})")

    def __len__(self) -> int:
        return len(self.records)

    def _load(self, index: int) -> Sample:
        return load_sample(self.records[index], self.manifest.root)


def make_loader(dataset: Dataset, batch_size: int, seed: int, shuffle: bool = True,
                num_workers: int = 0) -> DataLoader:
    """DataLoader with a seeded shuffling generator."""
    generator = torch.Generator()
    generator.manual_seed(seed)
    return DataLoader(dataset, batch_size=batch_size, shuffle=shuffle, num_workers=num_workers,
                      generator=generator, drop_last=False)
