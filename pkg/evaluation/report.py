#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Result tables (csv, markdown) and error/uncertainty heatmaps.
"""

import json
import logging
import os
from io import StringIO
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
import plotly.graph_objects as go
from jinja2 import Environment, FileSystemLoader

from depthmap.types import DepthMap, UncertaintyMap

from .evaluator import SPLITS, SplitReport

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["method", "split", "mae_mm", "rmse_mm", "imae_inv_km", "irmse_inv_km", "n_pixels"]
METRIC_COLUMNS = CSV_COLUMNS[2:6]
FORMATS = ("csv", "markdown")
TEMPLATE_DIR = Path(__file__).resolve().parent / "templates"

PathLike = Union[str, os.PathLike]


def report_frame(reports: Sequence[SplitReport]) -> pd.DataFrame:
    """One row per (method, split) in method order then day, night, all."""
    rows = []
    for split_report in reports:
        for split in SPLITS:
            metrics = split_report.splits.get(split)
            if metrics is None:
                continue
            rows.append({"method": split_report.method, "split": split, **metrics.model_dump()})
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def _markdown(reports: Sequence[SplitReport]) -> str:
    present = [split for split in SPLITS if any(split in r.splits for r in reports)]
    rows = []
    for split_report in reports:
        cells = []
        for split in present:
            metrics = split_report.splits.get(split)
            if metrics is None:
                cells += ["-"] * len(METRIC_COLUMNS)
            else:
                cells += [f"{getattr(metrics, column):.2f}" for column in METRIC_COLUMNS]
        rows.append({"method": split_report.method, "cells": cells})
    digests = {r.config_digest for r in reports if r.config_digest}
    environment = Environment(loader=FileSystemLoader(str(TEMPLATE_DIR)), keep_trailing_newline=True)
    template = environment.get_template("report.md.j2")
    return template.render(splits=present, rows=rows, config_digest=", ".join(sorted(digests)))


def report(reports: Union[SplitReport, Sequence[SplitReport]], fmt: str = "csv") -> str:
    """
    Renders split reports as a document.

    Args:
        reports: One report or several (one per method)
        fmt: ``csv`` or ``markdown``

    Returns:
        The document text
    """
    if isinstance(reports, SplitReport):
        reports = [reports]
    if fmt == "csv":
        buffer = StringIO()
        report_frame(reports).to_csv(buffer, index=False, lineterminator="\n")
        return buffer.getvalue()
    if fmt == "markdown":
        return _markdown(reports)
    raise ValueError(f"Unknown report format: {fmt} (expected one of {FORMATS})")


def write_reports(reports: Sequence[SplitReport], out_dir: PathLike, formats: Sequence[str] = FORMATS,
                  config_digest: Optional[str] = None, extra: Optional[Dict] = None) -> List[Path]:
    """
    Writes ``report.csv``/``report.md`` and the ``run.json`` sidecar.

    Returns:
        Paths written
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    suffixes = {"csv": "csv", "markdown": "md"}
    for fmt in formats:
        path = out_dir / f"report.{suffixes[fmt]}"
        path.write_text(report(reports, fmt), encoding="utf-8")
        written.append(path)
    sidecar = {
        "config_digest": config_digest,
        "methods": [r.method for r in reports],
        "sample_counts": {r.method: r.sample_counts for r in reports},
        **(extra or {}),
    }
    run_path = out_dir / "run.json"
    run_path.write_text(json.dumps(sidecar, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    written.append(run_path)
    logger.info(f"Wrote reports for {len(reports)} methods to {out_dir}")
    return written


def _heatmap(values: np.ndarray, title: str, colorscale: str, path: Optional[PathLike]) -> go.Figure:
    # Image row 0 is the top of the figure.
    figure = go.Figure(go.Heatmap(z=values, colorscale=colorscale))
    figure.update_layout(title=title, yaxis={"autorange": "reversed", "scaleanchor": "x"})
    if path is not None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        figure.write_html(str(path), include_plotlyjs="cdn", full_html=True, div_id=path.stem)
        logger.info(f"Wrote {title.lower()} to {path}")
    return figure


def plot_error_map(d: DepthMap, gt: DepthMap, path: Optional[PathLike] = None) -> go.Figure:
    """Heatmap of |d − d*| in meters; pixels without ground truth are blank."""
    error = np.where(gt.valid, np.abs(d.values.astype(np.float64) - gt.values), np.nan)
    return _heatmap(error, "Absolute error (m)", "Inferno", path)


def plot_uncertainty_map(sigma: UncertaintyMap, path: Optional[PathLike] = None) -> go.Figure:
    """Heatmap of the log uncertainty σ̂."""
    return _heatmap(sigma.values.astype(np.float64), "Log uncertainty", "Viridis", path)
