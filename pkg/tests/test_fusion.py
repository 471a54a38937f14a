import math

import numpy as np
import pytest
import torch

from core.config import FusionConfig
from core.errors import DimensionError, InputError
from depthmap.types import DepthMap, SparseDepthMap, UncertaintyMap
from fusion import (
    PackedInput,
    fuse_residual,
    fuse_tensors,
    lambda_tensor,
    lambda_weight,
    merge_plug_and_play,
    merge_tensors,
    pack_tensors,
    pack_url_input,
    unpack,
)


def _random_maps(rng, height, width):
    z = np.where(rng.random((height, width)) < 0.2, rng.uniform(1, 60, (height, width)), 0.0)
    zhat = rng.uniform(0.5, 80, (height, width))
    sigma = rng.uniform(-10, 10, (height, width))
    return SparseDepthMap(z), DepthMap.dense(zhat), UncertaintyMap(sigma)


@pytest.fixture
def maps(rng):
    return _random_maps(rng, 12, 16)


class TestPlugAndPlay:
    def test_matches_per_pixel_rule(self, rng):
        for _ in range(100):
            z, zhat, sigma = _random_maps(rng, 16, 16)
            tau = float(rng.uniform(-10, 10))
            merged = merge_plug_and_play(z, zhat, sigma, FusionConfig(tau=tau))
            for (i, j), measured in np.ndenumerate(z.values):
                if measured > 0:
                    expected = measured
                elif sigma.values[i, j] < tau:
                    expected = zhat.values[i, j]
                else:
                    expected = 0.0
                assert merged.values[i, j] == expected

    def test_mixed_precision_keeps_float64(self):
        z = SparseDepthMap(np.array([[0.0, 2.5]], dtype=np.float32))
        zhat = DepthMap.dense(np.array([[1.0 + 1e-12, 3.0]]))
        merged = merge_plug_and_play(z, zhat, UncertaintyMap(np.zeros((1, 2))), FusionConfig(tau=1.0))
        assert merged.values.dtype == np.float64
        assert merged.values.tolist() == [[1.0 + 1e-12, 2.5]]

    def test_tensor_form_promotes_dtypes(self):
        z = torch.tensor([[0.0, 2.5]], dtype=torch.float32)
        zhat = torch.tensor([[1.0 + 1e-12, 3.0]], dtype=torch.float64)
        merged = merge_tensors(z, zhat, torch.zeros(1, 2), tau=1.0)
        assert merged.dtype == torch.float64
        assert merged[0, 0].item() == 1.0 + 1e-12

    def test_measured_pixels_are_copied(self, maps):
        z, zhat, sigma = maps
        merged = merge_plug_and_play(z, zhat, sigma, FusionConfig(tau=10.0))
        assert np.array_equal(merged.values[z.valid], z.values[z.valid])

    def test_negative_infinite_threshold_is_identity(self, maps):
        z, zhat, sigma = maps
        merged = merge_plug_and_play(z, zhat, sigma, FusionConfig(tau=-math.inf))
        assert np.array_equal(merged.values, z.values)

    def test_large_threshold_densifies(self, maps):
        z, zhat, sigma = maps
        merged = merge_plug_and_play(z, zhat, sigma, FusionConfig(tau=11.0))
        assert merged.valid.all()

    def test_threshold_is_strict(self):
        z = SparseDepthMap(np.zeros((1, 2)))
        zhat = DepthMap.dense(np.array([[3.0, 4.0]]))
        sigma = UncertaintyMap(np.array([[2.0, 1.999]]))
        merged = merge_plug_and_play(z, zhat, sigma, FusionConfig(tau=2.0))
        assert merged.values.tolist() == [[0.0, 4.0]]

    def test_density_grows_with_threshold(self, maps):
        z, zhat, sigma = maps
        densities = [merge_plug_and_play(z, zhat, sigma, FusionConfig(tau=tau)).density
                     for tau in (-math.inf, -5.0, 0.0, 5.0, 11.0)]
        assert densities == sorted(densities)
        assert densities[0] == z.density

    def test_shape_mismatch(self, maps):
        z, zhat, _ = maps
        with pytest.raises(DimensionError):
            merge_plug_and_play(z, zhat, UncertaintyMap(np.zeros((3, 3))))

    def test_tensor_form_on_batches(self):
        z = torch.tensor([[[[0.0, 2.0], [0.0, 0.0]]]])
        zhat = torch.full((1, 1, 2, 2), 7.0)
        sigma = torch.tensor([[[[-1.0, -1.0], [1.0, 0.5]]]])
        merged = merge_tensors(z, zhat, sigma, tau=0.5)
        assert merged.tolist() == [[[[7.0, 2.0], [0.0, 0.0]]]]


class TestPacking:
    def test_pack_preserves_values(self, maps):
        z, zhat, sigma = maps
        packed = pack_url_input(z, zhat, sigma)
        assert packed.shape == z.shape
        assert np.array_equal(packed.values[0], z.values)
        assert np.array_equal(packed.values[1], zhat.values)
        assert np.array_equal(packed.values[2], sigma.values)
        z2, zhat2, sigma2 = unpack(packed)
        assert np.array_equal(z2.values, z.values)
        assert np.array_equal(zhat2.values, zhat.values)
        assert np.array_equal(sigma2.values, sigma.values)

    @pytest.mark.parametrize("channel,value", [(0, -1.0), (1, 0.0), (2, 10.5), (2, np.nan)])
    def test_packed_input_validation(self, channel, value):
        values = np.stack([np.zeros((2, 2)), np.ones((2, 2)), np.zeros((2, 2))])
        values[channel, 0, 0] = value
        with pytest.raises(InputError):
            PackedInput(values)

    def test_packed_input_shape(self):
        with pytest.raises(DimensionError):
            PackedInput(np.ones((2, 4, 4)))

    def test_pack_tensors(self):
        parts = [torch.full((2, 1, 3, 3), float(k)) for k in range(3)]
        packed = pack_tensors(*parts)
        assert packed.shape == (2, 3, 3, 3)
        assert packed[:, 2].eq(2.0).all()


class TestLambda:
    def test_known_values(self):
        cfg = FusionConfig(alpha=0.8, beta=0.0)
        weights = lambda_weight(UncertaintyMap(np.array([[0.0, 10.0, -10.0]])), cfg)
        assert weights[0, 0] == 0.5
        assert weights[0, 1] == pytest.approx(1.0 / (1.0 + math.exp(8.0)), rel=1e-12)
        assert weights[0, 2] == pytest.approx(1.0 / (1.0 + math.exp(-8.0)), rel=1e-12)

    def test_strictly_decreasing(self, rng):
        pairs = rng.uniform(-10, 10, (1000, 2))
        pairs = pairs[pairs[:, 0] != pairs[:, 1]]
        low, high = pairs.min(axis=1), pairs.max(axis=1)
        cfg = FusionConfig(alpha=0.8, beta=1.0)
        weights_low = lambda_weight(UncertaintyMap(low[None]), cfg)[0]
        weights_high = lambda_weight(UncertaintyMap(high[None]), cfg)[0]
        assert len(pairs) == 1000
        assert np.all(weights_low > weights_high)
        assert np.all((weights_high > 0) & (weights_low < 1))

    def test_tensor_passes_through(self):
        sigma = torch.linspace(-3, 3, 7)
        assert torch.equal(lambda_weight(sigma), lambda_tensor(sigma, 0.8, 0.0))


class TestResidualFusion:
    def test_fixed_point(self, rng):
        zhat = DepthMap.dense(rng.uniform(1, 80, (6, 8)))
        lam = rng.random((6, 8))
        fused = fuse_residual(zhat, zhat, lam)
        np.testing.assert_allclose(fused.values, zhat.values, rtol=1e-12)

    def test_convex_combination(self, rng):
        zhat = DepthMap.dense(rng.uniform(1, 80, (6, 8)))
        dhat = DepthMap.dense(rng.uniform(1, 80, (6, 8)))
        fused = fuse_residual(zhat, dhat, rng.random((6, 8))).values
        low = np.minimum(zhat.values, dhat.values)
        high = np.maximum(zhat.values, dhat.values)
        assert np.all(fused >= low - 1e-9) and np.all(fused <= high + 1e-9)

    def test_endpoints(self, rng):
        zhat = DepthMap.dense(rng.uniform(1, 80, (3, 3)))
        dhat = DepthMap.dense(rng.uniform(1, 80, (3, 3)))
        assert np.array_equal(fuse_residual(zhat, dhat, np.ones((3, 3))).values, zhat.values)
        assert np.array_equal(fuse_residual(zhat, dhat, np.zeros((3, 3))).values, dhat.values)

    def test_matches_per_pixel_rule(self, maps):
        _, zhat, sigma = maps
        dhat = DepthMap.dense(np.flipud(zhat.values).copy())
        cfg = FusionConfig(alpha=0.8, beta=0.5)
        fused = fuse_residual(zhat, dhat, lambda_weight(sigma, cfg))
        for (i, j), s in np.ndenumerate(sigma.values):
            lam = 1.0 / (1.0 + math.exp(cfg.alpha * (s - cfg.beta)))
            expected = lam * zhat.values[i, j] + (1 - lam) * dhat.values[i, j]
            assert fused.values[i, j] == pytest.approx(expected, rel=1e-12)

    def test_matches_scalar_blend_on_random_frames(self, rng):
        for _ in range(100):
            zhat = DepthMap.dense(rng.uniform(0.5, 80, (16, 16)))
            dhat = DepthMap.dense(rng.uniform(0.5, 80, (16, 16)))
            lam = rng.random((16, 16))
            fused = fuse_residual(zhat, dhat, lam)
            for (i, j), weight in np.ndenumerate(lam):
                expected = weight * zhat.values[i, j] + (1 - weight) * dhat.values[i, j]
                assert fused.values[i, j] == expected

    @pytest.mark.parametrize("bad", [-0.1, 1.1, np.nan])
    def test_rejects_weights_outside_unit_interval(self, bad):
        zhat = DepthMap.dense(np.ones((2, 2)))
        lam = np.full((2, 2), 0.5)
        lam[1, 1] = bad
        with pytest.raises(InputError):
            fuse_residual(zhat, zhat, lam)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            fuse_residual(DepthMap.dense(np.ones((2, 2))), DepthMap.dense(np.ones((2, 2))), np.ones((3, 3)))

    def test_gradient_to_backbone_is_scaled(self, rng):
        zhat = torch.tensor(rng.uniform(1, 80, (4, 4)))
        dhat = torch.tensor(rng.uniform(1, 80, (4, 4)), requires_grad=True)
        lam = lambda_tensor(torch.tensor(rng.uniform(-10, 10, (4, 4))), 0.8, 0.0)
        upstream = torch.tensor(rng.normal(size=(4, 4)))
        fuse_tensors(zhat, dhat, lam).backward(upstream)
        torch.testing.assert_close(dhat.grad, (1 - lam) * upstream)
