#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Procedural scenes rendered by analytic ray casting.

A scene is a ground plane plus axis-aligned boxes and spheres seen by a
pinhole camera at the origin (X right, Y down, Z forward). Rendering yields
the dense Z-depth, a Lambertian day image and a dimmed, noisy night image.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from core.config import SceneConfig

from depthmap.types import DepthMap, Image

logger = logging.getLogger(__name__)

LIGHT_DIRECTION = np.array([0.3, -1.0, -0.4]) / np.linalg.norm([0.3, -1.0, -0.4])
AMBIENT = 0.25
SKY_TOP = np.array([0.45, 0.62, 0.88])
SKY_HORIZON = np.array([0.80, 0.85, 0.90])
NIGHT_GAIN_RANGE = (0.05, 0.2)
NIGHT_NOISE_RANGE = (0.01, 0.05)


@dataclass(frozen=True)
class Sphere:
    center: Tuple[float, float, float]
    radius: float
    albedo: Tuple[float, float, float] = (0.7, 0.3, 0.3)


@dataclass(frozen=True)
class Box:
    lower: Tuple[float, float, float]
    upper: Tuple[float, float, float]
    albedo: Tuple[float, float, float] = (0.3, 0.5, 0.7)


Primitive = Union[Sphere, Box]


def _camera_rays(cfg: SceneConfig) -> np.ndarray:
    """Per-pixel ray directions with unit Z component, shape (H, W, 3)."""
    K = cfg.intrinsics
    height, width = cfg.image_size
    uu, vv = np.meshgrid(np.arange(width, dtype=np.float64), np.arange(height, dtype=np.float64))
    return np.stack([(uu - K.cx) / K.fx, (vv - K.cy) / K.fy, np.ones_like(uu)], axis=-1)


def _hit_sphere(rays: np.ndarray, sphere: Sphere) -> Tuple[np.ndarray, np.ndarray]:
    center = np.asarray(sphere.center, dtype=np.float64)
    a = np.einsum("hwc,hwc->hw", rays, rays)
    b = -2.0 * rays @ center
    c = center @ center - sphere.radius ** 2
    disc = b * b - 4 * a * c
    hit = disc >= 0
    t = np.full(a.shape, np.inf)
    t[hit] = (-b[hit] - np.sqrt(disc[hit])) / (2 * a[hit])
    t[t <= 0] = np.inf
    normals = (rays * t[..., None] - center) / sphere.radius
    return t, normals


def _hit_box(rays: np.ndarray, box: Box) -> Tuple[np.ndarray, np.ndarray]:
    lower = np.asarray(box.lower, dtype=np.float64)
    upper = np.asarray(box.upper, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = lower / rays
        t2 = upper / rays
    # Rays parallel to a slab: inside the slab never constrains t, outside never hits.
    parallel = rays == 0
    inside = (lower <= 0) & (upper >= 0)
    t_lo = np.where(parallel, np.where(inside, -np.inf, np.inf), np.minimum(t1, t2))
    t_hi = np.where(parallel, np.where(inside, np.inf, -np.inf), np.maximum(t1, t2))
    t_near = t_lo.max(axis=-1)
    t_far = t_hi.min(axis=-1)
    hit = (t_near <= t_far) & (t_near > 0)
    t = np.where(hit, t_near, np.inf)

    axis = t_lo.argmax(axis=-1)
    normals = np.zeros_like(rays)
    sign = -np.sign(np.take_along_axis(rays, axis[..., None], axis=-1))[..., 0]
    np.put_along_axis(normals, axis[..., None], sign[..., None], axis=-1)
    return t, normals


def _stripes(points: np.ndarray, period: float) -> np.ndarray:
    """Procedural albedo texture in [0.75, 1]."""
    phase = (points[..., 0] + points[..., 1] + points[..., 2]) * (2 * np.pi / period)
    return 0.875 + 0.125 * np.sin(phase)


def sample_primitives(cfg: SceneConfig, rng: np.random.Generator) -> List[Primitive]:
    """Draws ``cfg.num_primitives`` spheres and boxes inside the camera frustum."""
    K = cfg.intrinsics
    min_m, max_m = cfg.depth_range
    z_lo = max(min_m + 1.0, 3.0)
    z_hi = max(z_lo + 1.0, min(max_m * 0.5, 40.0))
    primitives: List[Primitive] = []
    for _ in range(cfg.num_primitives):
        z = rng.uniform(z_lo, z_hi)
        half_width = z * (K.width / 2) / K.fx
        x = rng.uniform(-0.8, 0.8) * half_width
        albedo = tuple(float(a) for a in rng.uniform(0.2, 0.9, size=3))
        if rng.random() < 0.5:
            radius = rng.uniform(0.5, 2.0)
            y = cfg.camera_height - radius if cfg.ground_plane else rng.uniform(-2.0, 2.0)
            primitives.append(Sphere(center=(x, y, z + radius), radius=radius, albedo=albedo))
        else:
            size = rng.uniform(0.8, 3.0, size=3)
            bottom = cfg.camera_height if cfg.ground_plane else rng.uniform(-1.0, 2.0)
            lower = (x - size[0] / 2, bottom - size[1], z)
            upper = (x + size[0] / 2, bottom, z + size[2])
            primitives.append(Box(lower=lower, upper=upper, albedo=albedo))
    return primitives


def render_night(day: Image, rng: np.random.Generator) -> Image:
    """Night rendering: day image times a gain in [0.05, 0.2] plus Gaussian noise."""
    gain = rng.uniform(*NIGHT_GAIN_RANGE)
    sigma = rng.uniform(*NIGHT_NOISE_RANGE)
    night = day.values * gain + rng.normal(0.0, sigma, size=day.values.shape)
    return Image(np.clip(night, 0.0, 1.0).astype(np.float32))


def generate_scene(cfg: SceneConfig, seed: int,
                   primitives: Optional[Sequence[Primitive]] = None) -> Tuple[DepthMap, Image, Image]:
    """
    Renders a procedural scene.

    Args:
        cfg: Scene configuration
        seed: Seed for primitive placement and night noise
        primitives: Explicit primitives; drawn from the seed when omitted

    Returns:
        (gt, day, night): dense Z-depth valid everywhere, day and night images
    """
    rng = np.random.default_rng(seed)
    if primitives is None:
        primitives = sample_primitives(cfg, rng)
    min_m, max_m = cfg.depth_range
    rays = _camera_rays(cfg)
    height, width = cfg.image_size

    depth = np.full((height, width), np.inf)
    normals = np.zeros((height, width, 3))
    albedo = np.zeros((height, width, 3))

    if cfg.ground_plane:
        with np.errstate(divide="ignore"):
            t = np.where(rays[..., 1] > 0, cfg.camera_height / rays[..., 1], np.inf)
        hit = t < depth
        depth[hit] = t[hit]
        normals[hit] = (0.0, -1.0, 0.0)
        points = rays[hit] * t[hit][:, None]
        checker = (np.floor(points[:, 0] / 2.0) + np.floor(points[:, 2] / 2.0)) % 2
        albedo[hit] = (0.35 + 0.15 * checker)[:, None] * np.array([1.0, 0.97, 0.9])

    for primitive in primitives:
        if isinstance(primitive, Sphere):
            t, prim_normals = _hit_sphere(rays, primitive)
            period = 0.5
        else:
            t, prim_normals = _hit_box(rays, primitive)
            period = 0.8
        hit = t < depth
        depth[hit] = t[hit]
        normals[hit] = prim_normals[hit]
        texture = _stripes(rays[hit] * t[hit][:, None], period)
        albedo[hit] = texture[:, None] * np.asarray(primitive.albedo)

    sky = ~np.isfinite(depth)
    depth = np.clip(np.where(sky, max_m, depth), min_m, max_m)

    shading = AMBIENT + (1 - AMBIENT) * np.clip(normals @ LIGHT_DIRECTION, 0.0, None)
    color = albedo * shading[..., None]
    rows = np.linspace(0.0, 1.0, height)[:, None, None]
    sky_color = np.broadcast_to(SKY_TOP * (1 - rows) + SKY_HORIZON * rows, (height, width, 3))
    color[sky] = sky_color[sky]

    day = Image(np.clip(color, 0.0, 1.0).transpose(2, 0, 1).astype(np.float32))
    night = render_night(day, rng)
    gt = DepthMap.dense(depth.astype(np.float32))

    logger.debug(f"Rendered scene seed={seed} with {len(primitives)} primitives, "
                 f"depth range [{gt.values.min():.2f}, {gt.values.max():.2f}] m")
    return gt, day, night
