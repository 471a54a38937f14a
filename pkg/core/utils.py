#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Utility functions and classes shared by every spade_url package.
"""

import json
import logging
import os
import random
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import torch
import yaml
from dotenv import load_dotenv

logger = logging.getLogger("spade_url")

DEFAULT_CACHE_DIR = os.path.join("~", ".cache", "spade_url")


def setup_logging(level: int = logging.INFO, log_file: Optional[str] = None) -> None:
    """
    Sets up logging for spade_url.

    Args:
        level: Logging level (default: INFO)
        log_file: Path to log file (optional)
    """
    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    root_logger = logging.getLogger()
    root_logger.setLevel(level)

    # Clear existing handlers
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)

    logger.info(f"Logging initialized at level {logging.getLevelName(level)}")


def load_config(config_path: str) -> Dict[str, Any]:
    """
    Loads a configuration document from a YAML or JSON file.

    Args:
        config_path: Path to configuration file

    Returns:
        Dict containing configuration

    Raises:
        FileNotFoundError: If config file doesn't exist
        yaml.YAMLError: If a YAML config file cannot be parsed
        json.JSONDecodeError: If a JSON config file cannot be parsed
    """
    if not os.path.exists(config_path):
        raise FileNotFoundError(f"Configuration file not found: {config_path}")

    _, ext = os.path.splitext(config_path)
    try:
        with open(config_path, 'r', encoding='utf-8') as f:
            if ext.lower() == '.json':
                config = json.load(f)
            else:
                config = yaml.safe_load(f)
    except yaml.YAMLError as e:
        logger.error(f"Invalid YAML in configuration file: {e}")
        raise
    except json.JSONDecodeError as e:
        logger.error(f"Invalid JSON in configuration file: {e}")
        raise

    logger.info(f"Configuration loaded from {config_path}")
    return config or {}


def seed_everything(seed: int) -> None:
    """
    Seeds python, numpy and torch and selects deterministic torch kernels.

    Args:
        seed: Seed shared by every random source
    """
    random.seed(seed)
    np.random.seed(seed % (2 ** 32))
    torch.manual_seed(seed)
    torch.use_deterministic_algorithms(True, warn_only=True)
    logger.debug(f"Random sources seeded with {seed}")


def get_cache_dir() -> Path:
    """
    Returns the checkpoint cache directory, creating it if needed.

    The location comes from the SPADE_URL_CACHE environment variable
    (``.env`` files are honored) and defaults to ``~/.cache/spade_url``.
    """
    load_dotenv()
    cache_dir = Path(os.path.expanduser(os.getenv("SPADE_URL_CACHE", DEFAULT_CACHE_DIR)))
    cache_dir.mkdir(parents=True, exist_ok=True)
    return cache_dir


class Singleton(type):
    """Singleton metaclass for ensuring only one instance of a class exists."""
    _instances = {}

    def __call__(cls, *args, **kwargs):
        if cls not in cls._instances:
            cls._instances[cls] = super(Singleton, cls).__call__(*args, **kwargs)
        return cls._instances[cls]
