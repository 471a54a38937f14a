#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Subcommand implementations. Each takes the parsed arguments and the run
configuration and returns an exit code; failures propagate as SpadeUrlError.
"""

import argparse
import logging
import os
from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd

from core.config import AugmentConfig, RunConfig, validate_model
from core.errors import EXIT_OK, ConfigurationError
from core.utils import get_cache_dir

from backbone.checkpoint import load_backbone, save_backbone
from backbone.predictors import (
    plug_and_play_model_fn,
    sparse_backbone_model_fn,
    spade_model_fn,
    trained_model_fn,
)
from backbone.trainer import BackboneState, train_backbone
from depthmap.dataset import ManifestDataset
from depthmap.io import write_depth_png16
from depthmap.manifest import Manifest, ManifestRecord, load_manifest, load_sample, write_manifest
from depthmap.transforms import bottom_crop
from evaluation.evaluator import SplitReport, evaluate, groundtruth_model_fn
from evaluation.report import plot_error_map, plot_uncertainty_map, write_reports
from fusion.merge import merge_plug_and_play
from spade.checkpoint import load_checkpoint, save_checkpoint
from spade.network import SpadeNet, spade_forward
from spade.trainer import train_spade_stage1, train_spade_stage2
from synth.writer import MANIFEST_NAME, write_dataset

logger = logging.getLogger(__name__)

MODEL_CHOICES = ("groundtruth", "spade", "baseline", "plug-and-play", "augment", "url")


def _default_path(name: str) -> Path:
    return get_cache_dir() / name


def _write_loss_curve(history: List[Dict[str, float]], ckpt: Path, config_digest: str) -> Path:
    path = ckpt.with_name(ckpt.name + ".loss.csv")
    frame = pd.DataFrame(history)
    frame["config_digest"] = config_digest
    frame.to_csv(path, index=False, lineterminator="\n")
    logger.info(f"Wrote loss curve with {len(history)} steps to {path}")
    return path


def _training_set(manifest: Manifest, augment: Optional[AugmentConfig], seed: int) -> ManifestDataset:
    dataset = ManifestDataset(manifest, split="train", augment=augment, seed=seed)
    if len(dataset) == 0:
        error_msg = "Manifest has no training records"
        logger.error(error_msg)
        raise ConfigurationError(error_msg)
    return dataset


def cmd_generate_data(args: argparse.Namespace, config: RunConfig) -> int:
    """Writes a synthetic all-day dataset."""
    write_dataset(config.dataset.n_scenes, config.scene, config.lidar, args.out,
                  day_night_ratio=1.0 - config.dataset.night_ratio, seed=config.seed,
                  heldout_fraction=config.dataset.heldout_fraction,
                  num_workers=config.dataset.num_workers, config_digest=config.digest())
    return EXIT_OK


def cmd_train_spade(args: argparse.Namespace, config: RunConfig) -> int:
    """Runs SpaDe stage 1, stage 2 or both, saving a checkpoint after each stage."""
    manifest = load_manifest(args.data)
    ckpt = Path(args.ckpt) if args.ckpt else _default_path("spade.pt")
    digest = config.digest()

    if args.stage == "2" and not ckpt.exists():
        error_msg = f"Stage 2 needs a stage-1 checkpoint, none at {ckpt}"
        logger.error(error_msg)
        raise ConfigurationError(error_msg)

    dataset = _training_set(manifest, None, config.seed)
    if args.stage in ("1", "both"):
        state = train_spade_stage1(dataset, config.spade.stage1, config.spade.arch, seed=config.seed)
        save_checkpoint(state, ckpt, digest)
    else:
        state = load_checkpoint(ckpt)
    if args.stage in ("2", "both"):
        state = train_spade_stage2(state, dataset, config.spade.stage2)
        save_checkpoint(state, ckpt, digest)
    _write_loss_curve(state.history, ckpt, digest)
    return EXIT_OK


def cmd_preprocess(args: argparse.Namespace, config: RunConfig) -> int:
    """Writes plug-and-play merged sparse maps and a manifest pointing at them."""
    spade = load_checkpoint(args.spade_ckpt).model
    manifest = load_manifest(args.data)
    out_dir = Path(args.out)
    fusion = config.url.fusion

    records = []
    for record in manifest.records:
        sample = load_sample(record, manifest.root)
        output = spade_forward(sample.sparse, spade)
        merged = merge_plug_and_play(sample.sparse, output.zhat, output.sigma, fusion)
        sparse_path = f"sparse/{record.id}.png"
        write_depth_png16(merged, out_dir / sparse_path)
        logger.debug(f"{record.id}: density {sample.sparse.density:.4f} -> {merged.density:.4f}")
        records.append(ManifestRecord(
            id=record.id,
            image_path=os.path.relpath(manifest.root / record.image_path, out_dir),
            sparse_path=sparse_path,
            gt_path=os.path.relpath(manifest.root / record.gt_path, out_dir),
            tag=record.tag, split=record.split))

    write_manifest(Manifest(records=records, config_digest=config.digest(), seed=manifest.seed),
                   out_dir / MANIFEST_NAME)
    logger.info(f"Preprocessed {len(records)} records with tau={fusion.tau}")
    return EXIT_OK


def _train_backbone_command(args: argparse.Namespace, config: RunConfig, mode: str,
                            spade: Optional[SpadeNet], default_name: str) -> int:
    manifest = load_manifest(args.data)
    augment = None
    if not args.no_augment:
        augment = validate_model(AugmentConfig, {**config.augment.model_dump(), "crop": config.url.crop})
    dataset = _training_set(manifest, augment, config.seed)
    state = train_backbone(dataset, config.url, spade=spade, mode=mode, tags=args.tags, seed=config.seed)
    ckpt = Path(args.out) if args.out else _default_path(default_name)
    digest = config.digest()
    save_backbone(state, ckpt, digest)
    _write_loss_curve(state.history, ckpt, digest)
    return EXIT_OK


def cmd_train_url(args: argparse.Namespace, config: RunConfig) -> int:
    """Trains a packed-input backbone with SpaDe frozen (``url`` or ``augment`` regime)."""
    spade = load_checkpoint(args.spade_ckpt).model
    return _train_backbone_command(args, config, args.mode, spade, f"backbone-{args.mode}.pt")


def cmd_train_baseline(args: argparse.Namespace, config: RunConfig) -> int:
    """Trains a backbone on raw sparse input, the pretrained model plug-and-play targets."""
    return _train_backbone_command(args, config, "sparse", None, "backbone-sparse.pt")


def _backbone_state(path: Optional[str], flag: str) -> BackboneState:
    if path is None:
        raise ConfigurationError(f"This model needs {flag}")
    return load_backbone(path)


def cmd_evaluate(args: argparse.Namespace, config: RunConfig) -> int:
    """Evaluates the requested methods and writes csv/markdown reports."""
    manifest = load_manifest(args.data)
    eval_cfg = config.evaluation
    records = manifest.select(split=eval_cfg.split)
    if not records:
        error_msg = f"Manifest {args.data} has no records in split {eval_cfg.split}"
        logger.error(error_msg)
        raise ConfigurationError(error_msg)

    spade = load_checkpoint(args.spade_ckpt).model if args.spade_ckpt else None

    def needs_spade() -> SpadeNet:
        if spade is None:
            raise ConfigurationError("This model needs --spade-ckpt")
        return spade

    model_fns = {}
    for model in args.model:
        if model == "groundtruth":
            model_fns[model] = groundtruth_model_fn
        elif model == "spade":
            model_fns[model] = spade_model_fn(needs_spade())
        elif model == "baseline":
            state = _backbone_state(args.baseline_ckpt, "--baseline-ckpt")
            model_fns[model] = sparse_backbone_model_fn(state.backbone)
        elif model == "plug-and-play":
            state = _backbone_state(args.baseline_ckpt, "--baseline-ckpt")
            model_fns[model] = plug_and_play_model_fn(state.backbone, needs_spade(), config.url.fusion)
        elif model == "augment":
            model_fns[model] = trained_model_fn(_backbone_state(args.augment_ckpt, "--augment-ckpt"),
                                                needs_spade())
        elif model == "url":
            model_fns[model] = trained_model_fn(_backbone_state(args.url_ckpt, "--url-ckpt"), needs_spade())

    crop = tuple(eval_cfg.crop) if eval_cfg.crop is not None else None
    digest = config.digest()
    reports: List[SplitReport] = [
        evaluate(model_fn, manifest, crop=crop, split=eval_cfg.split, max_depth=eval_cfg.max_depth,
                 method=name, config_digest=digest)
        for name, model_fn in model_fns.items()
    ]
    out_dir = Path(args.out)
    write_reports(reports, out_dir, formats=args.report, config_digest=digest,
                  extra={"dataset_config_digest": manifest.config_digest, "split": eval_cfg.split})

    if eval_cfg.plots:
        sample = load_sample(records[0], manifest.root)
        gt = bottom_crop(sample.gt, *crop) if crop else sample.gt
        for name, model_fn in model_fns.items():
            prediction = model_fn(sample)
            prediction = bottom_crop(prediction, *crop) if crop else prediction
            plot_error_map(prediction, gt, out_dir / "plots" / f"{name}_error.html")
        if spade is not None:
            sigma = spade_forward(sample.sparse, spade).sigma
            sigma = bottom_crop(sigma, *crop) if crop else sigma
            plot_uncertainty_map(sigma, out_dir / "plots" / "spade_uncertainty.html")
    return EXIT_OK
