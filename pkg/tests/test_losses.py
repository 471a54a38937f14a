import math

import numpy as np
import pytest
import torch

from core.config import LossConfig
from core.errors import DimensionError, UndefinedLossError
from depthmap.types import DepthMap
from losses import (
    LossParts,
    loss_depth_l2,
    loss_smoothness,
    loss_supervised,
    loss_total,
    loss_uncertainty,
    url_objective,
)


def central_difference_check(fn, x, samples=10, eps=1e-3, rtol=1e-4, seed=0):
    """Compares autograd against central differences at random coordinates of ``x``."""
    x = x.clone().requires_grad_(True)
    fn(x).backward()
    analytic = x.grad.clone()
    generator = np.random.default_rng(seed)
    for flat_index in generator.choice(x.numel(), size=samples, replace=False):
        index = tuple(int(i) for i in np.unravel_index(flat_index, x.shape))
        with torch.no_grad():
            plus, minus = x.detach().clone(), x.detach().clone()
            plus[index] += eps
            minus[index] -= eps
            numeric = (fn(plus) - fn(minus)).item() / (2 * eps)
        expected = analytic[index].item()
        assert abs(numeric - expected) <= rtol * max(abs(expected), abs(numeric)) + 1e-7, \
            f"gradient mismatch at {index}: autograd {expected}, numeric {numeric}"


def _ramp_with_noise(generator, shape=(6, 6)):
    """Depth whose neighboring differences stay far from zero."""
    rows, cols = np.meshgrid(np.arange(shape[0]), np.arange(shape[1]), indexing="ij")
    base = 2.0 + 0.7 * rows + 0.4 * cols
    return torch.tensor(base + generator.uniform(-0.05, 0.05, shape), dtype=torch.float64)


class TestClosedForm:
    def test_uncertainty_loss_at_unit_residual(self):
        value = loss_uncertainty(torch.tensor([[1.0]]), torch.tensor([[0.0]]), torch.tensor([[2.0]]))
        assert value.item() == 0.5

    def test_uncertainty_minimizer_is_log_residual(self):
        grid = torch.linspace(-2.0, 3.0, 50001, dtype=torch.float64)
        values = torch.stack([
            loss_uncertainty(torch.tensor([[3.0]], dtype=torch.float64), s.reshape(1, 1),
                             torch.tensor([[1.0]], dtype=torch.float64))
            for s in grid[::10]
        ])
        best = int(values.argmin())
        assert grid[::10][best].item() == pytest.approx(math.log(2.0), abs=0.01)
        assert values[best].item() == pytest.approx(0.5 + math.log(2.0), abs=0.01)

    def test_uncertainty_is_clamped(self):
        low = loss_uncertainty(torch.tensor([[1.0]]), torch.tensor([[-50.0]]), torch.tensor([[1.0]]))
        assert low.item() == pytest.approx(-10.0)

    def test_l2_and_supervised_values(self):
        zhat, gt = torch.tensor([[2.0, 4.0]]), torch.tensor([[1.0, 5.0]])
        assert loss_depth_l2(zhat, gt).item() == pytest.approx(1.0)
        assert loss_supervised(torch.tensor([[3.0, 5.0]]), gt, p=1).item() == pytest.approx(1.0)
        assert loss_supervised(torch.tensor([[3.0, 5.0]]), gt, p=2).item() == pytest.approx(2.0)
        with pytest.raises(ValueError):
            loss_supervised(zhat, gt, p=3)

    def test_invalid_ground_truth_is_ignored(self):
        zhat = torch.tensor([[2.0, 100.0]])
        gt = torch.tensor([[1.0, 0.0]])
        assert loss_depth_l2(zhat, gt).item() == pytest.approx(1.0)
        assert loss_supervised(zhat, gt, p=1).item() == pytest.approx(1.0)

    def test_raster_types_are_accepted(self):
        gt = DepthMap(values=np.array([[1.0, 5.0]]), valid=np.array([[True, False]]))
        assert loss_depth_l2(np.array([[3.0, 0.0]]), gt).item() == pytest.approx(4.0)

    def test_empty_mask_is_an_error(self):
        with pytest.raises(UndefinedLossError):
            loss_depth_l2(torch.ones(2, 2), torch.zeros(2, 2))

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            loss_depth_l2(torch.ones(2, 2), torch.ones(2, 3))


class TestSmoothness:
    def test_constant_depth_is_smooth(self):
        assert loss_smoothness(torch.full((5, 5), 3.0), torch.rand(3, 5, 5)).item() == 0.0

    def test_image_edges_discount_depth_edges(self):
        depth = torch.zeros(1, 1, 4, 4)
        depth[..., 2:] = 5.0
        flat = torch.zeros(1, 3, 4, 4)
        edge = flat.clone()
        edge[..., 2:] = 1.0
        assert loss_smoothness(depth, edge).item() < loss_smoothness(depth, flat).item()

    def test_single_column_rejected(self):
        with pytest.raises(DimensionError):
            loss_smoothness(torch.ones(4, 1), torch.ones(3, 4, 1))


class TestGradients:
    def test_depth_l2(self):
        generator = np.random.default_rng(0)
        gt = torch.tensor(generator.uniform(1, 10, (6, 6)))
        central_difference_check(lambda z: loss_depth_l2(z, gt), torch.tensor(generator.uniform(1, 10, (6, 6))))

    def test_depth_l2_wrt_ground_truth(self):
        generator = np.random.default_rng(4)
        zhat = torch.tensor(generator.uniform(1, 10, (6, 6)))
        valid = torch.ones(6, 6, dtype=torch.bool)
        central_difference_check(lambda gt: loss_depth_l2(zhat, gt, valid),
                                 torch.tensor(generator.uniform(1, 10, (6, 6))))

    @pytest.mark.parametrize("wrt", ["zhat", "sigma", "gt"])
    def test_uncertainty(self, wrt):
        generator = np.random.default_rng(1)
        maps = {
            "zhat": torch.tensor(generator.uniform(1, 10, (6, 6))),
            "sigma": torch.tensor(generator.normal(0, 1, (6, 6))),
            "gt": torch.tensor(generator.uniform(1, 10, (6, 6))),
        }
        valid = torch.ones(6, 6, dtype=torch.bool)

        def loss(x):
            return loss_uncertainty(**{**maps, wrt: x}, valid=valid)

        central_difference_check(loss, maps[wrt])

    @pytest.mark.parametrize("p", [1, 2])
    def test_supervised(self, p):
        generator = np.random.default_rng(2)
        gt = torch.tensor(generator.uniform(1, 10, (6, 6)))
        d = gt + torch.tensor(generator.choice([-1.0, 1.0], (6, 6)) * generator.uniform(0.1, 1.0, (6, 6)))
        central_difference_check(lambda x: loss_supervised(x, gt, p=p), d)

    def test_smoothness(self):
        generator = np.random.default_rng(3)
        image = torch.tensor(generator.random((3, 6, 6)))
        central_difference_check(lambda d: loss_smoothness(d, image), _ramp_with_noise(generator))

    def test_smoothness_wrt_image(self):
        generator = np.random.default_rng(5)
        depth = _ramp_with_noise(generator)
        rows, cols = np.meshgrid(np.arange(6), np.arange(6), indexing="ij")
        image = np.stack([0.1 * (c + 1) * rows + 0.05 * (c + 1) * cols for c in range(3)])
        image = torch.tensor(image + generator.uniform(-0.005, 0.005, image.shape))
        central_difference_check(lambda i: loss_smoothness(depth, i), image)


class TestUncertaintyStationarity:
    def test_gradient_vanishes_at_log_residual(self):
        generator = np.random.default_rng(6)
        zhat = torch.tensor(generator.uniform(1, 10, (6, 6)))
        gt = zhat + torch.tensor(generator.choice([-1.0, 1.0], (6, 6)) * generator.uniform(0.1, 5.0, (6, 6)))
        optimum = torch.log((zhat - gt).abs()).requires_grad_(True)
        loss_uncertainty(zhat, optimum, gt).backward()
        assert optimum.grad.abs().max().item() < 1e-12

    @pytest.mark.parametrize("residual", [0.05, 0.7, 3.0, 40.0])
    def test_log_residual_is_the_per_pixel_minimum(self, residual):
        zhat = torch.tensor([[10.0 + residual]], dtype=torch.float64)
        gt = torch.tensor([[10.0]], dtype=torch.float64)
        best = math.log(residual)
        at_best = loss_uncertainty(zhat, torch.tensor([[best]], dtype=torch.float64), gt).item()
        for offset in (-0.5, -1e-3, 1e-3, 0.5):
            nearby = loss_uncertainty(zhat, torch.tensor([[best + offset]], dtype=torch.float64), gt).item()
            assert nearby > at_best
        assert at_best == pytest.approx(0.5 + best, abs=1e-12)


class TestInvalidPixels:
    def test_uncertainty_ignores_invalid_pixels(self):
        generator = np.random.default_rng(7)
        zhat = torch.tensor(generator.uniform(1, 10, (6, 6)))
        sigma = torch.tensor(generator.normal(0, 1, (6, 6)))
        gt = torch.tensor(generator.uniform(1, 10, (6, 6)))
        valid = torch.tensor(generator.random((6, 6)) < 0.5)
        reference = loss_uncertainty(zhat, sigma, gt, valid)

        noise = torch.tensor(generator.uniform(1, 50, (6, 6)))
        sigma_edit = sigma.clone().requires_grad_(True)
        edited = loss_uncertainty(torch.where(valid, zhat, zhat + noise), sigma_edit,
                                  torch.where(valid, gt, noise), valid)
        assert edited.item() == reference.item()
        edited.backward()
        assert torch.all(sigma_edit.grad[~valid] == 0)

    def test_invalid_sigma_values_do_not_matter(self):
        zhat = torch.tensor([[2.0, 3.0]])
        gt = torch.tensor([[1.0, 0.0]])
        first = loss_uncertainty(zhat, torch.tensor([[0.0, 0.0]]), gt)
        second = loss_uncertainty(zhat, torch.tensor([[0.0, 9.0]]), gt)
        assert first.item() == second.item() == 0.5


def test_total_weights_terms():
    parts = LossParts(supervised=torch.tensor(2.0), smoothness=torch.tensor(3.0))
    assert loss_total(parts, LossConfig(w_sup=1.0, w_sm=0.1)).item() == pytest.approx(2.3)


def test_url_objective_combines_supervised_and_smoothness():
    d = torch.full((1, 1, 4, 4), 2.0)
    gt = torch.full((1, 1, 4, 4), 3.0)
    total, parts = url_objective(d, gt, torch.rand(1, 3, 4, 4), LossConfig(p_norm=1))
    assert parts.supervised.item() == pytest.approx(1.0)
    assert parts.smoothness.item() == 0.0
    assert total.item() == pytest.approx(1.0)
