"""
Shared fixtures: tiny cameras, scenes and datasets small enough for CPU tests.
"""

import os
import sys

import numpy as np
import pytest
import torch

# Add the project root to the path so the packages import without installation
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from core.config import (  # noqa: E402
    BackboneArch,
    CameraIntrinsics,
    LidarPattern,
    SceneConfig,
    SpadeArch,
    SpadeTrainConfig,
    UrlConfig,
)
from depthmap.types import Sample  # noqa: E402
from synth.lidar import sparsify  # noqa: E402
from synth.scene import generate_scene  # noqa: E402
from synth.writer import write_dataset  # noqa: E402


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow acceptance tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running toy-training acceptance test")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("SPADE_URL_CACHE", str(tmp_path / "cache"))


@pytest.fixture
def tiny_intrinsics():
    return CameraIntrinsics(fx=40.0, fy=40.0, cx=32.0, cy=24.0, width=64, height=48)


@pytest.fixture
def tiny_scene(tiny_intrinsics):
    return SceneConfig(num_primitives=3, depth_range=(1.0, 80.0), image_size=(48, 64),
                       intrinsics=tiny_intrinsics)


@pytest.fixture
def tiny_pattern():
    return LidarPattern(num_beams=16, vertical_fov=(-30.0, 10.0), azimuth_step=1.0, dropout_prob=0.1)


@pytest.fixture
def tiny_spade_arch():
    return SpadeArch(levels=2, base_channels=4)


@pytest.fixture
def tiny_train_config():
    return SpadeTrainConfig(lr=1e-3, epochs=2, batch_size=2)


@pytest.fixture
def tiny_url_config():
    return UrlConfig(backbone=BackboneArch(levels=2, base_channels=4), lr=1e-3, epochs=1,
                     milestones=[], batch_size=2, crop=None)


def make_samples(scene, pattern, n, tags=("day",)):
    samples = []
    for index in range(n):
        gt, day, night = generate_scene(scene, seed=index)
        sparse = sparsify(gt, pattern, seed=1000 + index, intrinsics=scene.intrinsics)
        tag = tags[index % len(tags)]
        samples.append(Sample(image=day if tag == "day" else night, sparse=sparse, gt=gt, tag=tag,
                              sample_id=f"{index:06d}"))
    return samples


@pytest.fixture
def tiny_samples(tiny_scene, tiny_pattern):
    return make_samples(tiny_scene, tiny_pattern, 4, tags=("day", "night"))


@pytest.fixture
def tiny_dataset(tmp_path, tiny_scene, tiny_pattern):
    """Manifest path of an 8-scene dataset (6 day, 2 night)."""
    return write_dataset(8, tiny_scene, tiny_pattern, tmp_path / "data", day_night_ratio=0.75,
                         seed=0, heldout_fraction=0.25)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture(autouse=True)
def _torch_seed():
    torch.manual_seed(0)


@pytest.fixture
def sample_factory():
    """``make_samples(scene, pattern, n, tags)`` for tests that need their own sample count."""
    return make_samples
