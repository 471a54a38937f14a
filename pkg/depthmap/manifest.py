#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Dataset manifest: one JSON document listing the records of a dataset.
Ensures manifests follow the expected schema before any record is read.
"""

import hashlib
import json
import logging
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Union

import jsonschema

from core.errors import FormatError

from .io import read_depth_png16, read_image_png, read_sparse_png16
from .types import TAGS, Sample

logger = logging.getLogger(__name__)

MANIFEST_FORMAT_VERSION = 1

MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["format_version", "records"],
    "properties": {
        "format_version": {"type": "integer", "const": MANIFEST_FORMAT_VERSION},
        "config_digest": {"type": ["string", "null"]},
        "seed": {"type": ["integer", "null"]},
        "records": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "image_path", "sparse_path", "gt_path", "tag", "split"],
                "properties": {
                    "id": {"type": "string"},
                    "image_path": {"type": "string"},
                    "sparse_path": {"type": "string"},
                    "gt_path": {"type": "string"},
                    "tag": {"type": "string", "enum": list(TAGS)},
                    "split": {"type": "string", "enum": ["train", "heldout"]},
                },
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}

PathLike = Union[str, os.PathLike]


@dataclass
class ManifestRecord:
    """One frame of a dataset; paths are relative to the manifest directory."""
    id: str
    image_path: str
    sparse_path: str
    gt_path: str
    tag: str
    split: str = "train"


@dataclass
class Manifest:
    """Records of a dataset plus the provenance of its generation."""
    records: List[ManifestRecord] = field(default_factory=list)
    config_digest: Optional[str] = None
    seed: Optional[int] = None
    root: Path = field(default_factory=Path.cwd, compare=False)

    def select(self, split: Optional[str] = None, tags: Optional[Iterable[str]] = None) -> List[ManifestRecord]:
        """Returns records filtered by split and tags, in manifest order."""
        wanted_tags = set(tags) if tags is not None else None
        return [
            record for record in self.records
            if (split is None or record.split == split)
            and (wanted_tags is None or record.tag in wanted_tags)
        ]

    def to_document(self) -> dict:
        return {
            "format_version": MANIFEST_FORMAT_VERSION,
            "config_digest": self.config_digest,
            "seed": self.seed,
            "records": [asdict(record) for record in self.records],
        }


def write_manifest(manifest: Manifest, path: PathLike) -> Path:
    """
    Writes a manifest as canonical JSON (sorted keys, stable indentation).

    Returns:
        The manifest path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = manifest.to_document()
    jsonschema.validate(instance=document, schema=MANIFEST_SCHEMA)
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps(document, sort_keys=True, indent=2))
        f.write("\n")
    logger.info(f"Wrote manifest with {len(manifest.records)} records to {path}")
    return path


def load_manifest(path: PathLike) -> Manifest:
    """
    Loads and validates a manifest.

    Raises:
        FileNotFoundError: If the manifest does not exist
        FormatError: If the document is not valid JSON or violates the schema
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Manifest not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            document = json.load(f)
        jsonschema.validate(instance=document, schema=MANIFEST_SCHEMA)
    except json.JSONDecodeError as e:
        error_msg = f"Invalid JSON in manifest {path}: {e}"
        logger.error(error_msg)
        raise FormatError(error_msg) from e
    except jsonschema.exceptions.ValidationError as e:
        error_msg = f"Manifest validation failed for {path}: {e.message}"
        logger.error(error_msg)
        raise FormatError(error_msg) from e

    records = [ManifestRecord(**record) for record in document["records"]]
    logger.info(f"Loaded manifest {path} with {len(records)} records")
    return Manifest(records=records, config_digest=document.get("config_digest"),
                    seed=document.get("seed"), root=path.resolve().parent)


def manifest_digest(path: PathLike) -> str:
    """SHA-256 of the manifest file bytes."""
    with open(path, "rb") as f:
        return hashlib.sha256(f.read()).hexdigest()


def load_sample(record: ManifestRecord, root: PathLike) -> Sample:
    """Reads the image, sparse depth and ground truth of one record."""
    root = Path(root)
    return Sample(image=read_image_png(root / record.image_path),
                  sparse=read_sparse_png16(root / record.sparse_path),
                  gt=read_depth_png16(root / record.gt_path),
                  tag=record.tag, sample_id=record.id)
