#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Command-line entry point.

Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 numerical failure.
"""

import argparse
import logging
import os
import sys
from typing import Any, Dict, List, Optional

# Add the project root to the path so the packages import without installation
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.append(project_root)

from core.config import DEFAULT_CONFIG_PATH, deep_merge, load_run_config, parse_overrides
from core.errors import EXIT_IO, SpadeUrlError
from core.utils import setup_logging

from cli.commands import (
    MODEL_CHOICES,
    cmd_evaluate,
    cmd_generate_data,
    cmd_preprocess,
    cmd_train_baseline,
    cmd_train_spade,
    cmd_train_url,
)

logger = logging.getLogger(__name__)

# Command flags that change the run configuration, so they enter its digest.
FLAG_KEYS = {
    "seed": ("seed",),
    "scenes": ("dataset", "n_scenes"),
    "night_ratio": ("dataset", "night_ratio"),
    "workers": ("dataset", "num_workers"),
    "tau": ("url", "fusion", "tau"),
    "backbone": ("url", "backbone", "name"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spade-url",
                                     description="Sparse-to-dense depth with uncertainty for all-day depth completion")
    parser.add_argument("--config", default=str(DEFAULT_CONFIG_PATH), help="YAML or JSON run configuration")
    parser.add_argument("--seed", type=int, default=None, help="Seed of every random source")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="Override a configuration entry, e.g. spade.stage1.epochs=2 (repeatable)")
    parser.add_argument("--log-level", default="info",
                        choices=["debug", "info", "warning", "error", "critical"], help="Logging level")
    parser.add_argument("--log-file", default=None, help="Also log to this file")
    subparsers = parser.add_subparsers(dest="command", required=True)

    generate = subparsers.add_parser("generate-data", help="Write a synthetic all-day dataset")
    generate.add_argument("--scenes", type=int, default=None, help="Number of scenes")
    generate.add_argument("--out", required=True, help="Output directory")
    generate.add_argument("--night-ratio", type=float, default=None, help="Fraction of night scenes")
    generate.add_argument("--workers", type=int, default=None, help="Scenes rendered concurrently")
    generate.set_defaults(handler=cmd_generate_data)

    spade = subparsers.add_parser("train-spade", help="Train SpaDe (stage 1, stage 2 or both)")
    spade.add_argument("--data", required=True, help="Dataset manifest")
    spade.add_argument("--stage", choices=["1", "2", "both"], default="both")
    spade.add_argument("--ckpt", default=None, help="Checkpoint path (default: $SPADE_URL_CACHE/spade.pt)")
    spade.set_defaults(handler=cmd_train_spade)

    preprocess = subparsers.add_parser("preprocess", help="Write plug-and-play merged sparse maps")
    preprocess.add_argument("--data", required=True, help="Dataset manifest")
    preprocess.add_argument("--spade-ckpt", required=True, help="SpaDe checkpoint")
    preprocess.add_argument("--tau", type=float, default=None, help="Uncertainty threshold (-inf disables)")
    preprocess.add_argument("--out", required=True, help="Output directory")
    preprocess.set_defaults(handler=cmd_preprocess)

    for name, handler, help_text in (
            ("train-url", cmd_train_url, "Train a backbone on [z, ẑ, σ̂] with SpaDe frozen"),
            ("train-baseline", cmd_train_baseline, "Train a backbone on raw sparse depth")):
        train = subparsers.add_parser(name, help=help_text)
        train.add_argument("--data", required=True, help="Dataset manifest")
        train.add_argument("--out", default=None, help="Backbone checkpoint path")
        train.add_argument("--tags", nargs="+", choices=["day", "night"], default=None,
                           help="Train only on these illumination tags")
        train.add_argument("--no-augment", action="store_true", help="Disable training augmentation")
        if name == "train-url":
            train.add_argument("--spade-ckpt", required=True, help="SpaDe checkpoint")
            train.add_argument("--backbone", default=None, help="Registered backbone name")
            train.add_argument("--mode", choices=["url", "augment"], default="url",
                               help="url: uncertainty-weighted fusion; augment: backbone output used directly")
        else:
            train.add_argument("--backbone", default="reference-sparse", help="Registered backbone name")
        train.set_defaults(handler=handler)

    evaluate = subparsers.add_parser("evaluate", help="Evaluate methods per day/night/all split")
    evaluate.add_argument("--data", required=True, help="Dataset manifest")
    evaluate.add_argument("--model", action="append", choices=MODEL_CHOICES, required=True,
                          help="Method to evaluate (repeatable)")
    evaluate.add_argument("--report", action="append", choices=["csv", "markdown"], default=None,
                          help="Report format (repeatable, default: both)")
    evaluate.add_argument("--out", required=True, help="Report directory")
    evaluate.add_argument("--spade-ckpt", default=None, help="SpaDe checkpoint")
    evaluate.add_argument("--baseline-ckpt", default=None, help="Raw-sparse backbone checkpoint")
    evaluate.add_argument("--augment-ckpt", default=None, help="Backbone trained in augment mode")
    evaluate.add_argument("--url-ckpt", default=None, help="Backbone trained in url mode")
    evaluate.add_argument("--tau", type=float, default=None, help="Plug-and-play threshold")
    evaluate.set_defaults(handler=cmd_evaluate)

    # --seed is accepted after the subcommand too; SUPPRESS keeps the global value when absent.
    for subparser in subparsers.choices.values():
        subparser.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="Seed of every random source")
    return parser


def flag_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Nested configuration overrides from command flags that were given."""
    overrides: Dict[str, Any] = {}
    for flag, keys in FLAG_KEYS.items():
        value = getattr(args, flag, None)
        if value is None:
            continue
        node = overrides
        for key in keys[:-1]:
            node = node.setdefault(key, {})
        node[keys[-1]] = value
    return overrides


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parses arguments, builds the run configuration and dispatches a command.

    Returns:
        Process exit code
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "evaluate" and args.report is None:
        args.report = ["csv", "markdown"]

    setup_logging(level=getattr(logging, args.log_level.upper()), log_file=args.log_file)
    try:
        overrides = deep_merge(parse_overrides(args.set), flag_overrides(args))
        config_path = args.config
        if config_path == str(DEFAULT_CONFIG_PATH) and not os.path.exists(config_path):
            config_path = None
        config = load_run_config(config_path, overrides)
        logger.info(f"Running {args.command} (seed {config.seed})")
        return args.handler(args, config)
    except SpadeUrlError as e:
        logger.error(f"{args.command} failed: {e}")
        return e.exit_code
    except OSError as e:
        logger.error(f"{args.command} failed with an I/O error: {e}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
