#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Writes a synthetic all-day dataset to disk: PNG rasters plus a manifest.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np

from core.config import LidarPattern, SceneConfig

from depthmap.io import write_depth_png16, write_image_png
from depthmap.manifest import Manifest, ManifestRecord, write_manifest

from .lidar import sparsify
from .scene import generate_scene

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def scene_seed(seed: int, index: int, stream: int = 0) -> int:
    """Independent per-scene seed derived from the dataset seed."""
    return int(np.random.SeedSequence([seed, index, stream]).generate_state(1)[0])


def assign_tags(n_scenes: int, day_night_ratio: float, seed: int) -> List[str]:
    """Tags ``round(n × ratio)`` scenes as day and the rest as night, in a seeded order."""
    n_day = int(round(n_scenes * day_night_ratio))
    order = np.random.default_rng([seed, 1]).permutation(n_scenes)
    tags = ["day"] * n_scenes
    for index in order[n_day:]:
        tags[int(index)] = "night"
    return tags


def assign_splits(tags: List[str], heldout_fraction: float, seed: int) -> List[str]:
    """Holds out ``round(fraction × count)`` scenes of each tag."""
    rng = np.random.default_rng([seed, 2])
    splits = ["train"] * len(tags)
    for tag in ("day", "night"):
        indices = [i for i, t in enumerate(tags) if t == tag]
        n_heldout = int(round(len(indices) * heldout_fraction))
        for index in rng.permutation(indices)[:n_heldout] if indices else []:
            splits[int(index)] = "heldout"
    return splits


def write_dataset(n_scenes: int, cfg: SceneConfig, pattern: LidarPattern,
                  out_dir: Union[str, os.PathLike], day_night_ratio: float = 0.875,
                  seed: int = 0, heldout_fraction: float = 0.2, num_workers: int = 1,
                  config_digest: Optional[str] = None) -> Path:
    """
    Generates ``n_scenes`` scenes and writes them with a manifest.

    Args:
        n_scenes: Number of scenes
        cfg: Scene configuration
        pattern: LiDAR pattern for the sparse depth
        out_dir: Output directory
        day_night_ratio: Fraction of scenes tagged day
        seed: Dataset seed
        heldout_fraction: Fraction of each tag recorded in the held-out split
        num_workers: Scenes rendered concurrently
        config_digest: Digest of the run configuration, recorded in the manifest

    Returns:
        Path to the manifest
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tags = assign_tags(n_scenes, day_night_ratio, seed)
    splits = assign_splits(tags, heldout_fraction, seed)

    def render(index: int) -> ManifestRecord:
        record_id = f"{index:06d}"
        gt, day, night = generate_scene(cfg, scene_seed(seed, index))
        sparse = sparsify(gt, pattern, scene_seed(seed, index, stream=1), cfg.intrinsics)
        record = ManifestRecord(id=record_id, image_path=f"image/{record_id}.png",
                                sparse_path=f"sparse/{record_id}.png", gt_path=f"gt/{record_id}.png",
                                tag=tags[index], split=splits[index])
        write_image_png(day if tags[index] == "day" else night, out_dir / record.image_path)
        write_depth_png16(sparse, out_dir / record.sparse_path)
        write_depth_png16(gt, out_dir / record.gt_path)
        logger.debug(f"Wrote scene {record_id} ({record.tag}, {record.split}, "
                     f"{sparse.density:.2%} measured)")
        return record

    with ThreadPoolExecutor(max_workers=num_workers) as pool:
        records = list(pool.map(render, range(n_scenes)))

    counts: Dict[str, int] = {tag: tags.count(tag) for tag in ("day", "night")}
    manifest_path = write_manifest(Manifest(records=records, config_digest=config_digest, seed=seed),
                                   out_dir / MANIFEST_NAME)
    logger.info(f"Dataset with {n_scenes} scenes ({counts['day']} day / {counts['night']} night) "
                f"written to {out_dir}")
    return manifest_path
