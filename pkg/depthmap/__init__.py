"""
Raster types, projection, cropping, augmentation and storage of depth data.
"""

from core.config import AugmentConfig, CameraIntrinsics

from .dataset import ManifestDataset, SampleListDataset, make_loader, sample_to_tensors
from .io import (
    read_depth_png16,
    read_image_png,
    read_sparse_png16,
    write_depth_png16,
    write_image_png,
)
from .manifest import Manifest, ManifestRecord, load_manifest, load_sample, manifest_digest, write_manifest
from .projection import project_points
from .transforms import augment, bottom_crop
from .types import UNCERTAINTY_CLAMP, DepthMap, Image, Sample, SparseDepthMap, UncertaintyMap

__all__ = [
    'AugmentConfig', 'CameraIntrinsics', 'DepthMap', 'Image', 'Manifest', 'ManifestDataset',
    'ManifestRecord', 'Sample', 'SampleListDataset', 'SparseDepthMap', 'UNCERTAINTY_CLAMP',
    'UncertaintyMap', 'augment', 'bottom_crop', 'load_manifest', 'load_sample', 'make_loader',
    'manifest_digest', 'project_points', 'read_depth_png16', 'read_image_png', 'read_sparse_png16',
    'sample_to_tensors', 'write_depth_png16', 'write_image_png', 'write_manifest',
]
