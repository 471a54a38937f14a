"""
Synthetic all-day data: procedural scenes, LiDAR imitation and dataset writing.
"""

from .lidar import ring_pixels, sparsify
from .scene import Box, Sphere, generate_scene, render_night, sample_primitives
from .writer import MANIFEST_NAME, assign_splits, assign_tags, scene_seed, write_dataset

__all__ = [
    'Box', 'MANIFEST_NAME', 'Sphere', 'assign_splits', 'assign_tags', 'generate_scene',
    'render_night', 'ring_pixels', 'sample_primitives', 'scene_seed', 'sparsify', 'write_dataset',
]
