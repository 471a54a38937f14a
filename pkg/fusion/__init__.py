"""
Plug-and-play merge and uncertainty-weighted residual fusion.
"""

from .merge import (
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

__all__ = [
    'PackedInput', 'fuse_residual', 'fuse_tensors', 'lambda_tensor', 'lambda_weight',
    'merge_plug_and_play', 'merge_tensors', 'pack_tensors', 'pack_url_input', 'unpack',
]
