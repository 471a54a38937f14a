#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Split-wise evaluation of a depth predictor over a dataset.

A predictor is any callable mapping a ``Sample`` to a ``DepthMap`` of the same
size. Errors are pixel-weighted within each split; samples are visited in
manifest order so results do not depend on worker scheduling.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, Field

from depthmap.manifest import Manifest, load_sample
from depthmap.transforms import bottom_crop
from depthmap.types import DepthMap, Sample

from .metrics import DEFAULT_MAX_DEPTH, MetricAccumulator, MetricSet, accumulate

logger = logging.getLogger(__name__)

ModelFn = Callable[[Sample], DepthMap]

SPLITS = ("day", "night", "all")


class SplitReport(BaseModel):
    """Metrics of one method per illumination split."""
    method: str = Field(..., description="Name of the evaluated method")
    splits: Dict[str, MetricSet] = Field(default_factory=dict,
                                         description="Metrics per split; empty splits are absent")
    sample_counts: Dict[str, int] = Field(default_factory=dict, description="Samples per split")
    config_digest: Optional[str] = Field(None, description="Digest of the run configuration")


def groundtruth_model_fn(sample: Sample) -> DepthMap:
    """Predicts the ground truth itself."""
    return sample.gt


def _iter_samples(data: Union[Manifest, Sequence[Sample]], split: Optional[str],
                  tags: Optional[Iterable[str]]) -> Tuple[int, Callable[[int], Sample]]:
    if isinstance(data, Manifest):
        records = data.select(split=split, tags=tags)
        return len(records), lambda index: load_sample(records[index], data.root)
    wanted = set(tags) if tags is not None else None
    samples = [sample for sample in data if wanted is None or sample.tag in wanted]
    return len(samples), lambda index: samples[index]


def evaluate(model_fn: ModelFn, data: Union[Manifest, Sequence[Sample]],
             crop: Optional[Tuple[int, int]] = None, split: Optional[str] = None,
             max_depth: float = DEFAULT_MAX_DEPTH, method: str = "model",
             tags: Optional[Iterable[str]] = None, num_workers: int = 1,
             config_digest: Optional[str] = None) -> SplitReport:
    """
    Evaluates a predictor on the day, night and all splits.

    Args:
        model_fn: Predictor from a sample to dense depth
        data: Manifest (records selected by ``split``) or in-memory samples
        crop: Optional bottom crop (height, width) applied to prediction and ground truth
        split: Manifest split to evaluate (None: all records)
        max_depth: Evaluation cap in meters
        method: Name recorded in the report
        tags: Optional tag filter
        num_workers: Samples predicted concurrently
        config_digest: Recorded in the report

    Returns:
        SplitReport with one MetricSet per non-empty split
    """
    count, load = _iter_samples(data, split, tags)

    def score(index: int) -> Tuple[str, MetricAccumulator]:
        sample = load(index)
        prediction = model_fn(sample)
        gt = sample.gt
        if crop is not None:
            prediction, gt = bottom_crop(prediction, *crop), bottom_crop(gt, *crop)
        return sample.tag, accumulate(prediction, gt, max_depth)

    with ThreadPoolExecutor(max_workers=num_workers) as pool:
        scored: List[Tuple[str, MetricAccumulator]] = list(pool.map(score, range(count)))

    totals: Dict[str, MetricAccumulator] = {name: MetricAccumulator() for name in SPLITS}
    counts: Dict[str, int] = {name: 0 for name in SPLITS}
    for tag, acc in scored:
        totals[tag] = totals[tag].merge(acc)
        totals["all"] = totals["all"].merge(acc)
        counts[tag] += 1
        counts["all"] += 1

    report = SplitReport(method=method, config_digest=config_digest)
    for name in SPLITS:
        if totals[name].count == 0:
            logger.warning(f"Split {name} has no valid pixels for {method}; reported as absent")
            continue
        report.splits[name] = totals[name].finalize()
        report.sample_counts[name] = counts[name]
    logger.info(f"Evaluated {method} on {count} samples: "
                + ", ".join(f"{name} MAE {metrics.mae_mm:.1f} mm" for name, metrics in report.splits.items()))
    return report

