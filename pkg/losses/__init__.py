"""
Training objectives for SpaDe and the downstream backbone.
"""

from .objectives import (
    LossParts,
    as_tensor,
    forward_gradients,
    loss_depth_l2,
    loss_smoothness,
    loss_supervised,
    loss_total,
    loss_uncertainty,
    masked_mean,
    url_objective,
    valid_mask,
)

__all__ = [
    'LossParts', 'as_tensor', 'forward_gradients', 'loss_depth_l2', 'loss_smoothness',
    'loss_supervised', 'loss_total', 'loss_uncertainty', 'masked_mean', 'url_objective', 'valid_mask',
]
